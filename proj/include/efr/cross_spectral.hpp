#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "efr/types.hpp"

namespace efr {

// Cross-spectral density between two channels' transfer functions across
// frame lags. Row index runs over lags, column index over frequency bins.
struct CsdResult {
  std::vector<std::complex<double>> values;  // row-major, lags x K
  std::vector<std::uint8_t> valid;           // row-major, lags x K
  std::vector<int> lags;                     // frames, -max_lag..max_lag
  std::vector<double> bin_freqs_hz;
  std::pair<std::string, std::string> pair;

  std::size_t bins() const { return bin_freqs_hz.size(); }
  std::size_t lag_index(int lag) const {
    for (std::size_t i = 0; i < lags.size(); ++i)
      if (lags[i] == lag) return i;
    throw std::out_of_range("CsdResult: lag not present");
  }
  const std::complex<double>& at(std::size_t lag_idx, std::size_t k) const {
    return values[lag_idx * bins() + k];
  }
  bool valid_at(std::size_t lag_idx, std::size_t k) const {
    return valid[lag_idx * bins() + k] != 0;
  }
};

inline void check_compatible(const TransferFunction& x, const TransferFunction& y) {
  check_same_grid(x.spec, y.spec);
}

// R_xy(tau, k): average over overlapping frames of H_x(m,k) * conj(H_y(m+tau,k)).
// Only frames valid in both masks contribute, and each (tau, k) cell is
// normalized by its own overlap count so short lags are not biased against
// long ones. Cells with no jointly valid overlap are flagged invalid.
inline CsdResult csd(const TransferFunction& tf_x, const TransferFunction& tf_y, int max_lag = 10) {
  check_compatible(tf_x, tf_y);
  const std::size_t frames = tf_x.frames();
  const std::size_t bins = tf_x.bins();
  if (max_lag < 0) throw std::invalid_argument("csd: max_lag must be non-negative");
  if (static_cast<std::size_t>(max_lag) >= frames)
    throw std::invalid_argument("csd: max_lag must be smaller than the frame count");

  CsdResult out;
  out.bin_freqs_hz = tf_x.spec.bin_freqs_hz;
  out.pair = {tf_x.channel_label, tf_y.channel_label};
  out.lags.resize(2 * static_cast<std::size_t>(max_lag) + 1);
  for (int t = -max_lag; t <= max_lag; ++t) out.lags[static_cast<std::size_t>(t + max_lag)] = t;
  out.values.assign(out.lags.size() * bins, {0.0, 0.0});
  out.valid.assign(out.lags.size() * bins, 0);

  for (std::size_t li = 0; li < out.lags.size(); ++li) {
    const int tau = out.lags[li];
    for (std::size_t k = 0; k < bins; ++k) {
      std::complex<double> acc{0.0, 0.0};
      std::size_t count = 0;
      const std::size_t m_begin = tau < 0 ? static_cast<std::size_t>(-tau) : 0;
      const std::size_t m_end = tau > 0 ? frames - static_cast<std::size_t>(tau) : frames;
      for (std::size_t m = m_begin; m < m_end; ++m) {
        const std::size_t my = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(m) + tau);
        if (!tf_x.mask.at(m, k) || !tf_y.mask.at(my, k)) continue;
        acc += tf_x.spec.at(m, k) * std::conj(tf_y.spec.at(my, k));
        ++count;
      }
      if (count > 0) {
        out.values[li * bins + k] = acc / static_cast<double>(count);
        out.valid[li * bins + k] = 1;
      }
    }
  }
  return out;
}

// Zero-lag CSD magnitude as a frequency series.
inline FrequencySeries csd_zero_lag_magnitude(const CsdResult& r) {
  FrequencySeries out;
  out.kind = SeriesKind::csd_magnitude;
  out.bin_freqs_hz = r.bin_freqs_hz;
  const std::size_t li = r.lag_index(0);
  out.values.assign(r.bins(), 0.0);
  out.valid.assign(r.bins(), 0);
  for (std::size_t k = 0; k < r.bins(); ++k) {
    if (!r.valid_at(li, k)) continue;
    out.values[k] = std::abs(r.at(li, k));
    out.valid[k] = 1;
  }
  return out;
}

// Normalized zero-lag cross-spectrum:
//   C_xy(k) = |sum H_x conj(H_y)| / sqrt(sum |H_x|^2 * sum |H_y|^2)
// over jointly valid frames; in [0, 1] by Cauchy-Schwarz. Measures the
// consistency of the per-frame phase difference, independent of gain.
inline FrequencySeries coherence_coefficient(const TransferFunction& tf_x,
                                             const TransferFunction& tf_y) {
  check_compatible(tf_x, tf_y);
  const std::size_t frames = tf_x.frames();
  const std::size_t bins = tf_x.bins();

  FrequencySeries out;
  out.kind = SeriesKind::coherence;
  out.bin_freqs_hz = tf_x.spec.bin_freqs_hz;
  out.values.assign(bins, 0.0);
  out.valid.assign(bins, 0);

  for (std::size_t k = 0; k < bins; ++k) {
    std::complex<double> cross{0.0, 0.0};
    double power_x = 0.0, power_y = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < frames; ++m) {
      if (!tf_x.mask.at(m, k) || !tf_y.mask.at(m, k)) continue;
      const auto hx = tf_x.spec.at(m, k);
      const auto hy = tf_y.spec.at(m, k);
      cross += hx * std::conj(hy);
      power_x += std::norm(hx);
      power_y += std::norm(hy);
      ++count;
    }
    if (count == 0 || power_x <= 0.0 || power_y <= 0.0) continue;
    const double c = std::abs(cross) / std::sqrt(power_x * power_y);
    out.values[k] = std::min(c, 1.0);  // clamp Cauchy-Schwarz rounding spill
    out.valid[k] = 1;
  }
  return out;
}

}  // namespace efr
