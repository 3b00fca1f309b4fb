#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "efr/fft.hpp"
#include "efr/types.hpp"

namespace efr {

// Low-pass FIR design target. cutoff_hz marks the center of the transition
// band: the passband edge is cutoff - width/2, the stopband edge cutoff + width/2.
struct FirSpec {
  double cutoff_hz{0.0};
  double transition_width_hz{0.0};
  double passband_ripple_db{0.0};
  double stopband_atten_db{0.0};
  double sample_rate_hz{0.0};
};

inline void validate(const FirSpec& spec) {
  if (!(spec.sample_rate_hz > 0.0)) throw std::invalid_argument("FirSpec: sample rate must be positive");
  if (!(spec.cutoff_hz > 0.0 && spec.cutoff_hz < spec.sample_rate_hz / 2.0))
    throw std::invalid_argument("FirSpec: cutoff must lie in (0, Nyquist)");
  if (!(spec.transition_width_hz > 0.0)) throw std::invalid_argument("FirSpec: transition width must be positive");
  if (!(spec.stopband_atten_db > 0.0)) throw std::invalid_argument("FirSpec: stopband attenuation must be positive");
  if (!(spec.passband_ripple_db > 0.0)) throw std::invalid_argument("FirSpec: passband ripple must be positive");
}

// Linear-phase (type I) low-pass filter: odd tap count, symmetric coefficients.
struct FirFilter {
  std::vector<double> taps;
  FirSpec spec;

  std::size_t group_delay_samples() const { return (taps.size() - 1) / 2; }
};

// Complex frequency response of an FIR at the given frequencies.
inline std::vector<std::complex<double>> fir_frequency_response(std::span<const double> taps,
                                                                std::span<const double> freqs_hz,
                                                                double sample_rate_hz) {
  std::vector<std::complex<double>> h(freqs_hz.size());
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * freqs_hz[i] / sample_rate_hz;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < taps.size(); ++n)
      acc += taps[n] * std::exp(std::complex<double>(0.0, -w * static_cast<double>(n)));
    h[i] = acc;
  }
  return h;
}

// Kaiser-window low-pass design, sized from the stricter of the passband
// ripple and stopband attenuation targets.
inline FirFilter design_lowpass(const FirSpec& spec, std::size_t max_taps = 8191) {
  validate(spec);
  const double nyquist = spec.sample_rate_hz / 2.0;
  if (!(spec.cutoff_hz + spec.transition_width_hz / 2.0 < nyquist))
    throw std::invalid_argument("design_lowpass: transition band exceeds Nyquist");

  const double delta_pass = 1.0 - std::pow(10.0, -spec.passband_ripple_db / 20.0);
  const double delta_stop = std::pow(10.0, -spec.stopband_atten_db / 20.0);
  const double delta = std::min(delta_pass, delta_stop);
  const double atten_db = -20.0 * std::log10(delta);

  double beta = 0.0;
  if (atten_db > 50.0)
    beta = 0.1102 * (atten_db - 8.7);
  else if (atten_db >= 21.0)
    beta = 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);

  const double delta_omega = 2.0 * std::numbers::pi * spec.transition_width_hz / spec.sample_rate_hz;
  std::size_t numtaps = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * delta_omega))) + 1;
  if (numtaps % 2 == 0) ++numtaps;  // type I
  if (numtaps > max_taps)
    throw std::invalid_argument("design_lowpass: spec requires " + std::to_string(numtaps) +
                                " taps, exceeding the cap of " + std::to_string(max_taps));

  const double half = static_cast<double>(numtaps - 1) / 2.0;
  const double wc = 2.0 * std::numbers::pi * spec.cutoff_hz / spec.sample_rate_hz;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);

  FirFilter filter;
  filter.spec = spec;
  filter.taps.resize(numtaps);
  for (std::size_t n = 0; n < numtaps; ++n) {
    const double m = static_cast<double>(n) - half;
    const double ideal = (m == 0.0) ? wc / std::numbers::pi : std::sin(wc * m) / (std::numbers::pi * m);
    const double r = m / half;
    const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    filter.taps[n] = ideal * window;
  }
  // Enforce exact coefficient symmetry against rounding drift.
  for (std::size_t n = 0; n < numtaps / 2; ++n) filter.taps[numtaps - 1 - n] = filter.taps[n];
  return filter;
}

// Zero-phase application: forward convolution with group-delay compensation,
// output time-aligned with the input and of equal length (edges zero-padded).
inline SignalRecord apply_filter(const FirFilter& filter, const SignalRecord& signal) {
  if (signal.sample_rate_hz != filter.spec.sample_rate_hz)
    throw std::invalid_argument("apply_filter: sample rate mismatch (" +
                                std::to_string(signal.sample_rate_hz) + " vs filter " +
                                std::to_string(filter.spec.sample_rate_hz) + ")");
  if (signal.samples.size() <= filter.taps.size())
    throw std::invalid_argument("apply_filter: signal shorter than filter");

  const auto full = fft::convolve(signal.samples, filter.taps);
  const std::size_t delay = filter.group_delay_samples();
  SignalRecord out;
  out.sample_rate_hz = signal.sample_rate_hz;
  out.label = signal.label;
  out.samples.assign(full.begin() + static_cast<std::ptrdiff_t>(delay),
                     full.begin() + static_cast<std::ptrdiff_t>(delay + signal.samples.size()));
  return out;
}

// Analytic signal z(n) = x(n) + j*hilbert(x)(n), built in the frequency
// domain: negative bins zeroed, positive bins doubled, DC and Nyquist kept.
inline std::vector<std::complex<double>> analytic_signal(const SignalRecord& signal) {
  const std::size_t n = signal.samples.size();
  if (n == 0) throw std::invalid_argument("analytic_signal: empty input");
  if (n < 4) throw std::invalid_argument("analytic_signal: need at least 4 samples");

  std::vector<std::complex<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = {signal.samples[i], 0.0};
  auto spectrum = fft::fft(x);

  // DC (and Nyquist for even n) kept unscaled; positive bins doubled;
  // negative bins zeroed.
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) spectrum[k] *= 2.0;
  for (std::size_t k = n / 2 + 1; k < n; ++k) spectrum[k] = {0.0, 0.0};
  return fft::ifft(spectrum);
}

}  // namespace efr
