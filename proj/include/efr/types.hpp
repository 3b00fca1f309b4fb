#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace efr {

// Uniformly sampled real-valued time series. EEG samples are microvolts,
// audio is normalized to [-1, 1], envelopes are non-negative amplitude.
struct SignalRecord {
  std::vector<double> samples;
  double sample_rate_hz{0.0};
  std::string label;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

inline void validate(const SignalRecord& s) {
  if (!(s.sample_rate_hz > 0.0))
    throw std::invalid_argument("SignalRecord '" + s.label + "': sample rate must be positive");
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    if (!std::isfinite(s.samples[i]))
      throw std::invalid_argument("SignalRecord '" + s.label + "': non-finite sample at index " +
                                  std::to_string(i));
  }
}

// Frequency of a one-sided DFT bin.
inline double bin_freq(std::size_t index, double sample_rate_hz, std::size_t window_len) {
  if (window_len == 0) throw std::invalid_argument("bin_freq: window length must be positive");
  if (index > window_len / 2)
    throw std::out_of_range("bin_freq: bin " + std::to_string(index) + " exceeds Nyquist bin " +
                            std::to_string(window_len / 2));
  return static_cast<double>(index) * sample_rate_hz / static_cast<double>(window_len);
}

// Time-frequency grid of complex values. Row m holds the one-sided spectrum
// of the frame starting at sample m*L; K = N/2 + 1 bins.
struct ComplexSpectrogram {
  std::vector<std::complex<double>> values;  // row-major, M x K
  std::vector<double> frame_times_s;         // length M, frame start times
  std::vector<double> bin_freqs_hz;          // length K
  std::size_t window_len_samples{0};
  std::size_t hop_samples{0};

  std::size_t frames() const { return frame_times_s.size(); }
  std::size_t bins() const { return bin_freqs_hz.size(); }

  std::complex<double>& at(std::size_t m, std::size_t k) { return values[m * bins() + k]; }
  const std::complex<double>& at(std::size_t m, std::size_t k) const {
    return values[m * bins() + k];
  }
};

inline void check_same_grid(const ComplexSpectrogram& a, const ComplexSpectrogram& b) {
  if (a.frames() != b.frames() || a.bins() != b.bins() ||
      a.window_len_samples != b.window_len_samples || a.hop_samples != b.hop_samples)
    throw std::invalid_argument("spectrogram shape mismatch");
  for (std::size_t k = 0; k < a.bins(); ++k) {
    if (a.bin_freqs_hz[k] != b.bin_freqs_hz[k])
      throw std::invalid_argument("spectrogram bin frequencies differ");
  }
}

// Per-bin validity of a transfer-function estimate. A bin is invalid when the
// excitation magnitude there falls below floor_ratio times the global
// excitation maximum, making the spectral ratio unstable.
struct TfMask {
  std::vector<std::uint8_t> valid;  // row-major, M x K
  std::size_t rows{0};
  std::size_t cols{0};
  double floor_ratio{1e-3};

  bool at(std::size_t m, std::size_t k) const { return valid[m * cols + k] != 0; }
  void set(std::size_t m, std::size_t k, bool v) { valid[m * cols + k] = v ? 1 : 0; }
};

// Per-frame, per-bin complex ratio of response spectrum to excitation
// spectrum. Invalid bins hold 0 and are flagged in the mask, never NaN.
struct TransferFunction {
  ComplexSpectrogram spec;
  TfMask mask;
  std::string stimulus_label;
  std::string channel_label;

  std::size_t frames() const { return spec.frames(); }
  std::size_t bins() const { return spec.bins(); }
};

enum class SeriesKind { avg_magnitude, phase_delay, csd_magnitude, coherence };

inline const char* to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::avg_magnitude: return "avg_magnitude";
    case SeriesKind::phase_delay: return "phase_delay";
    case SeriesKind::csd_magnitude: return "csd_magnitude";
    case SeriesKind::coherence: return "coherence";
  }
  return "unknown";
}

inline SeriesKind series_kind_from_string(const std::string& s) {
  if (s == "avg_magnitude") return SeriesKind::avg_magnitude;
  if (s == "phase_delay") return SeriesKind::phase_delay;
  if (s == "csd_magnitude") return SeriesKind::csd_magnitude;
  if (s == "coherence") return SeriesKind::coherence;
  throw std::invalid_argument("unknown series kind: " + s);
}

// Real-valued vector indexed by frequency bin. Bins with no valid estimate
// hold 0 and are flagged invalid.
struct FrequencySeries {
  std::vector<double> values;
  std::vector<double> bin_freqs_hz;
  std::vector<std::uint8_t> valid;
  SeriesKind kind{SeriesKind::avg_magnitude};

  std::size_t size() const { return values.size(); }
};

}  // namespace efr
