#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "efr/fft.hpp"
#include "efr/types.hpp"

namespace efr {

// Deterministic Gaussian source: fixed Box-Muller over mt19937_64 so streams
// are identical across platforms and standard-library versions.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // (0, 1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_{false};
  double spare_{0.0};
};

// Known linear system used to validate the estimators before any real data:
// the true magnitude/phase response is available in closed form for every
// kind, so pipeline output can be checked against ground truth.
struct SynthSystem {
  enum class Kind { identity, gain, delay, fir, gain_phase_profile, time_varying };

  struct Segment {
    double start_s{0.0};
    std::vector<double> taps;
  };

  Kind kind{Kind::identity};
  double gain_value{1.0};
  std::size_t delay_samples{0};
  std::vector<double> fir_taps;
  std::vector<double> profile_freqs_hz;
  std::vector<double> profile_magnitude;
  std::vector<double> profile_phase_rad;
  std::vector<Segment> schedule;
  double noise_rms{0.0};
  std::uint64_t seed{0};

  static SynthSystem identity(double noise_rms = 0.0, std::uint64_t seed = 0) {
    SynthSystem s;
    s.kind = Kind::identity;
    s.noise_rms = noise_rms;
    s.seed = seed;
    return s;
  }
  static SynthSystem gain(double alpha, double noise_rms = 0.0, std::uint64_t seed = 0) {
    if (!(alpha > 0.0)) throw std::invalid_argument("SynthSystem::gain: gain must be positive");
    SynthSystem s;
    s.kind = Kind::gain;
    s.gain_value = alpha;
    s.noise_rms = noise_rms;
    s.seed = seed;
    return s;
  }
  static SynthSystem delay(std::size_t samples, double noise_rms = 0.0, std::uint64_t seed = 0) {
    SynthSystem s;
    s.kind = Kind::delay;
    s.delay_samples = samples;
    s.noise_rms = noise_rms;
    s.seed = seed;
    return s;
  }
  static SynthSystem fir(std::vector<double> taps, double noise_rms = 0.0, std::uint64_t seed = 0) {
    if (taps.empty()) throw std::invalid_argument("SynthSystem::fir: empty taps");
    SynthSystem s;
    s.kind = Kind::fir;
    s.fir_taps = std::move(taps);
    s.noise_rms = noise_rms;
    s.seed = seed;
    return s;
  }
  static SynthSystem gain_phase_profile(std::vector<double> freqs_hz, std::vector<double> magnitude,
                                        std::vector<double> phase_rad, double noise_rms = 0.0,
                                        std::uint64_t seed = 0) {
    if (freqs_hz.size() != magnitude.size() || freqs_hz.size() != phase_rad.size() || freqs_hz.size() < 2)
      throw std::invalid_argument("SynthSystem::gain_phase_profile: inconsistent profile");
    SynthSystem s;
    s.kind = Kind::gain_phase_profile;
    s.profile_freqs_hz = std::move(freqs_hz);
    s.profile_magnitude = std::move(magnitude);
    s.profile_phase_rad = std::move(phase_rad);
    s.noise_rms = noise_rms;
    s.seed = seed;
    return s;
  }
  static SynthSystem time_varying(std::vector<Segment> schedule, double noise_rms = 0.0,
                                  std::uint64_t seed = 0) {
    if (schedule.empty()) throw std::invalid_argument("SynthSystem::time_varying: empty schedule");
    SynthSystem s;
    s.kind = Kind::time_varying;
    s.schedule = std::move(schedule);
    s.noise_rms = noise_rms;
    s.seed = seed;
    return s;
  }
};

namespace detail {

inline std::vector<double> causal_convolve_same_length(const std::vector<double>& x,
                                                       const std::vector<double>& taps) {
  const auto full = fft::convolve(x, taps);
  return {full.begin(), full.begin() + static_cast<std::ptrdiff_t>(x.size())};
}

// Piecewise-linear interpolation of a magnitude/phase profile onto the full
// rfft grid, endpoints held beyond the profile range.
inline std::vector<std::complex<double>> profile_on_grid(const SynthSystem& s, std::size_t n,
                                                         double sample_rate_hz) {
  const std::size_t bins = n / 2 + 1;
  std::vector<std::complex<double>> g(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
    const auto& fs = s.profile_freqs_hz;
    double mag, phase;
    if (f <= fs.front()) {
      mag = s.profile_magnitude.front();
      phase = s.profile_phase_rad.front();
    } else if (f >= fs.back()) {
      mag = s.profile_magnitude.back();
      phase = s.profile_phase_rad.back();
    } else {
      std::size_t i = 1;
      while (fs[i] < f) ++i;
      const double t = (f - fs[i - 1]) / (fs[i] - fs[i - 1]);
      mag = s.profile_magnitude[i - 1] + t * (s.profile_magnitude[i] - s.profile_magnitude[i - 1]);
      phase = s.profile_phase_rad[i - 1] + t * (s.profile_phase_rad[i] - s.profile_phase_rad[i - 1]);
    }
    g[k] = std::polar(mag, phase);
  }
  return g;
}

}  // namespace detail

// Apply the system to the excitation and add seeded sensor noise on the
// response side. Deterministic given (system, excitation).
inline SignalRecord generate(const SynthSystem& system, const SignalRecord& excitation) {
  validate(excitation);
  const std::size_t n = excitation.samples.size();

  SignalRecord out;
  out.sample_rate_hz = excitation.sample_rate_hz;
  out.label = "response";

  switch (system.kind) {
    case SynthSystem::Kind::identity:
      out.samples = excitation.samples;
      break;
    case SynthSystem::Kind::gain:
      out.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) out.samples[i] = system.gain_value * excitation.samples[i];
      break;
    case SynthSystem::Kind::delay: {
      if (system.delay_samples >= n) throw std::invalid_argument("generate: delay exceeds signal length");
      out.samples.assign(n, 0.0);
      for (std::size_t i = system.delay_samples; i < n; ++i)
        out.samples[i] = excitation.samples[i - system.delay_samples];
      break;
    }
    case SynthSystem::Kind::fir:
      out.samples = detail::causal_convolve_same_length(excitation.samples, system.fir_taps);
      break;
    case SynthSystem::Kind::gain_phase_profile: {
      auto spectrum = fft::rfft(excitation.samples);
      const auto g = detail::profile_on_grid(system, n, excitation.sample_rate_hz);
      for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= g[k];
      out.samples = fft::irfft(spectrum, n);
      break;
    }
    case SynthSystem::Kind::time_varying: {
      out.samples.assign(n, 0.0);
      for (std::size_t si = 0; si < system.schedule.size(); ++si) {
        const auto& seg = system.schedule[si];
        const std::size_t begin = static_cast<std::size_t>(
            std::llround(seg.start_s * excitation.sample_rate_hz));
        const std::size_t end =
            (si + 1 < system.schedule.size())
                ? static_cast<std::size_t>(
                      std::llround(system.schedule[si + 1].start_s * excitation.sample_rate_hz))
                : n;
        if (begin >= n) continue;
        // Filter the whole record with this segment's response, then splice,
        // so segment interiors carry no restart transients.
        const auto filtered = detail::causal_convolve_same_length(excitation.samples, seg.taps);
        for (std::size_t i = begin; i < std::min(end, n); ++i) out.samples[i] = filtered[i];
      }
      break;
    }
  }

  if (system.noise_rms > 0.0) {
    GaussianRng rng(system.seed);
    for (auto& v : out.samples) v += system.noise_rms * rng.normal();
  }
  return out;
}

// Seeded white Gaussian excitation at the EEG rate, normalized to unit RMS.
// At 200 Hz the generated noise already spans the full 0-100 Hz band.
inline SignalRecord broadband_excitation(double duration_s, std::uint64_t seed,
                                         double sample_rate_hz = 200.0) {
  if (!(duration_s >= 10.0)) throw std::invalid_argument("broadband_excitation: duration must be >= 10 s");
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));

  SignalRecord out;
  out.sample_rate_hz = sample_rate_hz;
  out.label = "excitation";
  out.samples.resize(n);
  GaussianRng rng(seed);
  double sum_sq = 0.0;
  for (auto& v : out.samples) {
    v = rng.normal();
    sum_sq += v * v;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(n));
  if (rms > 0.0)
    for (auto& v : out.samples) v /= rms;
  return out;
}

}  // namespace efr
