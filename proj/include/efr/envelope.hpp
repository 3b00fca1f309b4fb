#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "efr/fft.hpp"
#include "efr/filtering.hpp"
#include "efr/types.hpp"

namespace efr {

// Audio-rate low-pass -> analytic signal -> magnitude -> envelope low-pass,
// then resampled to the EEG rate. audio_rate_envelope keeps the
// pre-resampling signal for diagnostics.
struct EnvelopeResult {
  SignalRecord envelope;
  SignalRecord audio_rate_envelope;
  FirSpec pre_filter_spec;
  FirSpec envelope_filter_spec;
  std::size_t clamp_count{0};
  double max_clamp_magnitude{0.0};
  // Leading/trailing span contaminated by filter edges; downstream analysis
  // trims at least this much from each end.
  double edge_unreliable_s{0.0};
};

// FFT-domain rational resampling: truncate the one-sided spectrum to the new
// Nyquist and invert at the new length. Amplitude-preserving; output length
// is round(input_len * target / source). Downsampling only.
inline SignalRecord resample(const SignalRecord& signal, double target_rate_hz) {
  if (!(signal.sample_rate_hz > 0.0)) throw std::invalid_argument("resample: invalid source rate");
  if (!(target_rate_hz > 0.0)) throw std::invalid_argument("resample: invalid target rate");
  if (target_rate_hz > signal.sample_rate_hz)
    throw std::invalid_argument("resample: upsampling is unsupported");
  if (signal.samples.empty()) throw std::invalid_argument("resample: empty signal");

  if (target_rate_hz == signal.sample_rate_hz) return signal;

  const std::size_t n = signal.samples.size();
  const std::size_t m = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * target_rate_hz / signal.sample_rate_hz));
  if (m == 0) throw std::invalid_argument("resample: output would be empty");

  const auto spectrum = fft::rfft(signal.samples);
  std::vector<std::complex<double>> truncated(m / 2 + 1, {0.0, 0.0});
  const std::size_t keep = std::min(truncated.size(), spectrum.size());
  for (std::size_t k = 0; k < keep; ++k) truncated[k] = spectrum[k];
  if (m % 2 == 0 && keep == truncated.size()) {
    // The new Nyquist bin can only carry a real cosine.
    truncated[m / 2] = {truncated[m / 2].real(), 0.0};
  }

  // irfft normalizes by the new length m; rescale so per-bin amplitudes match
  // the source spectrum (net factor 1/n on the unnormalized inverse).
  auto samples = fft::irfft(truncated, m);
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  for (auto& v : samples) v *= scale;

  SignalRecord out;
  out.samples = std::move(samples);
  out.sample_rate_hz = target_rate_hz;
  out.label = signal.label;
  return out;
}

// Stimulus envelope at the EEG rate:
//   low-pass (1 kHz cutoff, 30 Hz transition) -> analytic signal ->
//   instantaneous amplitude -> low-pass (100 Hz cutoff, 20 Hz transition) ->
//   clamp small negative ringing at 0 -> resample to target_rate_hz.
inline EnvelopeResult extract_envelope(const SignalRecord& audio, double target_rate_hz = 200.0) {
  if (!(audio.sample_rate_hz >= 2000.0))
    throw std::invalid_argument("extract_envelope: audio rate must be at least 2000 Hz");
  if (audio.samples.empty()) throw std::invalid_argument("extract_envelope: empty audio");

  // The envelope filter's transition at audio rates needs more taps than the
  // general-purpose default cap allows.
  constexpr std::size_t kMaxTaps = 32767;

  EnvelopeResult result;
  result.pre_filter_spec = {1000.0, 30.0, 0.00175, 60.0, audio.sample_rate_hz};
  result.envelope_filter_spec = {100.0, 20.0, 0.00175, 60.0, audio.sample_rate_hz};

  const auto pre_filter = design_lowpass(result.pre_filter_spec, kMaxTaps);
  const auto band_limited = apply_filter(pre_filter, audio);

  const auto analytic = analytic_signal(band_limited);
  SignalRecord amplitude;
  amplitude.sample_rate_hz = audio.sample_rate_hz;
  amplitude.label = audio.label;
  amplitude.samples.resize(analytic.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) amplitude.samples[i] = std::abs(analytic[i]);

  const auto env_filter = design_lowpass(result.envelope_filter_spec, kMaxTaps);
  auto smoothed = apply_filter(env_filter, amplitude);

  // |z| is non-negative; linear-phase filtering can ring slightly negative.
  for (auto& v : smoothed.samples) {
    if (v < 0.0) {
      ++result.clamp_count;
      result.max_clamp_magnitude = std::max(result.max_clamp_magnitude, -v);
      v = 0.0;
    }
  }

  result.edge_unreliable_s =
      static_cast<double>(pre_filter.group_delay_samples() + env_filter.group_delay_samples()) /
      audio.sample_rate_hz;

  result.audio_rate_envelope = smoothed;
  result.envelope = resample(smoothed, target_rate_hz);
  result.envelope.label = audio.label.empty() ? "envelope" : audio.label;
  // Resampling can reintroduce tiny negative ripple at the trimmed-away edges.
  for (auto& v : result.envelope.samples) v = std::max(v, 0.0);
  return result;
}

}  // namespace efr
