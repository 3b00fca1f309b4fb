#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "efr/fft.hpp"
#include "efr/types.hpp"

namespace efr {

enum class WindowKind { hann, hamming, rectangular };

inline const char* to_string(WindowKind w) {
  switch (w) {
    case WindowKind::hann: return "hann";
    case WindowKind::hamming: return "hamming";
    case WindowKind::rectangular: return "rectangular";
  }
  return "unknown";
}

inline WindowKind window_kind_from_string(const std::string& s) {
  if (s == "hann") return WindowKind::hann;
  if (s == "hamming") return WindowKind::hamming;
  if (s == "rectangular") return WindowKind::rectangular;
  throw std::invalid_argument("unknown window kind: " + s);
}

struct StftConfig {
  double window_len_s{1.0};
  double hop_s{0.5};
  WindowKind window_kind{WindowKind::hann};
};

inline void validate(const StftConfig& c) {
  if (!(c.hop_s > 0.0 && c.hop_s <= c.window_len_s))
    throw std::invalid_argument("StftConfig: hop must lie in (0, window length]");
}

inline std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  switch (kind) {
    case WindowKind::rectangular:
      break;
    case WindowKind::hann:
      for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      break;
    case WindowKind::hamming:
      for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      break;
  }
  return w;
}

// One-sided short-time Fourier transform. Frame m covers samples
// [m*L, m*L + N); trailing samples that do not fill a whole window are
// dropped, so M = floor((len - N) / L) + 1.
inline ComplexSpectrogram stft(const SignalRecord& signal, const StftConfig& config) {
  validate(config);
  const double fs = signal.sample_rate_hz;
  if (!(fs > 0.0)) throw std::invalid_argument("stft: signal sample rate must be positive");
  const std::size_t n = static_cast<std::size_t>(std::llround(config.window_len_s * fs));
  const std::size_t hop = static_cast<std::size_t>(std::llround(config.hop_s * fs));
  if (n == 0 || hop == 0) throw std::invalid_argument("stft: window/hop too small for sample rate");
  if (signal.samples.size() < n)
    throw std::invalid_argument("stft: signal shorter than one window (" +
                                std::to_string(signal.samples.size()) + " < " + std::to_string(n) + ")");

  const std::size_t frames = (signal.samples.size() - n) / hop + 1;
  const std::size_t bins = n / 2 + 1;
  const auto window = make_window(config.window_kind, n);

  ComplexSpectrogram out;
  out.window_len_samples = n;
  out.hop_samples = hop;
  out.values.resize(frames * bins);
  out.frame_times_s.resize(frames);
  out.bin_freqs_hz.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) out.bin_freqs_hz[k] = bin_freq(k, fs, n);
  for (std::size_t m = 0; m < frames; ++m)
    out.frame_times_s[m] = static_cast<double>(m * hop) / fs;

  std::vector<double> frame(n);
  for (std::size_t m = 0; m < frames; ++m) {
    const std::size_t start = m * hop;
    for (std::size_t i = 0; i < n; ++i) frame[i] = signal.samples[start + i] * window[i];
    const auto spectrum = fft::rfft(frame);
    std::copy(spectrum.begin(), spectrum.end(), out.values.begin() + static_cast<std::ptrdiff_t>(m * bins));
  }
  return out;
}

}  // namespace efr
