#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "efr/types.hpp"

namespace efr {

// Mask bins whose excitation magnitude is below floor_ratio times the global
// excitation maximum; the spectral ratio is unstable there.
inline TfMask excitation_mask(const ComplexSpectrogram& excitation, double floor_ratio = 1e-3) {
  TfMask mask;
  mask.rows = excitation.frames();
  mask.cols = excitation.bins();
  mask.floor_ratio = floor_ratio;
  mask.valid.resize(mask.rows * mask.cols);

  double max_mag = 0.0;
  for (const auto& v : excitation.values) max_mag = std::max(max_mag, std::abs(v));
  const double floor = floor_ratio * max_mag;
  for (std::size_t i = 0; i < excitation.values.size(); ++i)
    mask.valid[i] = std::abs(excitation.values[i]) >= floor ? 1 : 0;
  return mask;
}

// Per-frame, per-bin ratio of response spectrum to excitation spectrum.
// Invalid bins hold 0 and are excluded from all downstream averages.
inline TransferFunction transfer_function(const ComplexSpectrogram& excitation,
                                          const ComplexSpectrogram& response,
                                          double floor_ratio = 1e-3,
                                          std::string stimulus_label = {},
                                          std::string channel_label = {}) {
  check_same_grid(excitation, response);

  TransferFunction tf;
  tf.stimulus_label = std::move(stimulus_label);
  tf.channel_label = std::move(channel_label);
  tf.mask = excitation_mask(excitation, floor_ratio);
  tf.spec.frame_times_s = excitation.frame_times_s;
  tf.spec.bin_freqs_hz = excitation.bin_freqs_hz;
  tf.spec.window_len_samples = excitation.window_len_samples;
  tf.spec.hop_samples = excitation.hop_samples;
  tf.spec.values.resize(excitation.values.size());
  for (std::size_t i = 0; i < excitation.values.size(); ++i) {
    tf.spec.values[i] = tf.mask.valid[i] ? response.values[i] / excitation.values[i]
                                         : std::complex<double>{0.0, 0.0};
  }
  return tf;
}

// log10 |H(m,k)| per time-frequency cell; invalid cells carry NaN (emitted as
// null in JSON output).
inline std::vector<double> log_magnitude_map(const TransferFunction& tf) {
  std::vector<double> out(tf.spec.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = tf.mask.valid[i] ? std::log10(std::abs(tf.spec.values[i]))
                              : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// Arithmetic mean of |H(m,k)| over valid frames, per bin. Bins with zero
// valid frames are flagged invalid.
inline FrequencySeries avg_magnitude(const TransferFunction& tf) {
  const std::size_t frames = tf.frames();
  const std::size_t bins = tf.bins();
  FrequencySeries out;
  out.kind = SeriesKind::avg_magnitude;
  out.bin_freqs_hz = tf.spec.bin_freqs_hz;
  out.values.assign(bins, 0.0);
  out.valid.assign(bins, 0);
  for (std::size_t k = 0; k < bins; ++k) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < frames; ++m) {
      if (!tf.mask.at(m, k)) continue;
      sum += std::abs(tf.spec.at(m, k));
      ++count;
    }
    if (count > 0) {
      out.values[k] = sum / static_cast<double>(count);
      out.valid[k] = 1;
    }
  }
  return out;
}

inline double wrap_two_pi(double angle) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(angle, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}

enum class PhaseAverage { arithmetic, circular };

// Time-averaged phase difference (response minus excitation) per bin, each
// frame's difference wrapped into [0, 2pi) before averaging. The arithmetic
// mean of wrapped values is the reported quantity; the circular variant is
// available for sensitivity checks only.
inline FrequencySeries phase_delay(const ComplexSpectrogram& excitation,
                                   const ComplexSpectrogram& response,
                                   const TfMask& mask,
                                   PhaseAverage average = PhaseAverage::arithmetic) {
  check_same_grid(excitation, response);
  if (mask.rows != excitation.frames() || mask.cols != excitation.bins())
    throw std::invalid_argument("phase_delay: mask shape mismatch");

  const std::size_t frames = excitation.frames();
  const std::size_t bins = excitation.bins();
  FrequencySeries out;
  out.kind = SeriesKind::phase_delay;
  out.bin_freqs_hz = excitation.bin_freqs_hz;
  out.values.assign(bins, 0.0);
  out.valid.assign(bins, 0);

  for (std::size_t k = 0; k < bins; ++k) {
    double sum = 0.0;
    std::complex<double> resultant{0.0, 0.0};
    std::size_t count = 0;
    for (std::size_t m = 0; m < frames; ++m) {
      if (!mask.at(m, k)) continue;
      const double diff = wrap_two_pi(std::arg(response.at(m, k)) - std::arg(excitation.at(m, k)));
      sum += diff;
      resultant += std::exp(std::complex<double>(0.0, diff));
      ++count;
    }
    if (count > 0) {
      const double mean = (average == PhaseAverage::arithmetic)
                              ? sum / static_cast<double>(count)
                              : wrap_two_pi(std::arg(resultant));
      out.values[k] = wrap_two_pi(mean);
      out.valid[k] = 1;
    }
  }
  return out;
}

}  // namespace efr
