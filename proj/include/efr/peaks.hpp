#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "efr/types.hpp"

namespace efr {

struct Peak {
  double freq_hz{0.0};
  double magnitude{0.0};
  double width_hz{0.0};
  double prominence{0.0};
};

// Cross-participant counts of dominant-peak frequencies, one counts vector
// per channel (or channel-pair) label.
struct PeakHistogram {
  std::vector<double> bin_edges_hz;
  std::map<std::string, std::vector<std::int64_t>> counts;
  std::int64_t n_participants{0};
};

namespace detail {

// Candidate local maximum on the compacted valid curve.
struct Candidate {
  std::size_t index;  // index into the compacted arrays
  double value;
};

// Prominence per the usual contour-line definition: walk outwards from the
// peak until a strictly higher sample or the curve end, take the minimum of
// each side, prominence = peak - max(left_min, right_min). Returns the base
// positions so the width search can stay inside the peak's own window.
struct Prominence {
  double value;
  std::size_t left_base;
  std::size_t right_base;
};

inline Prominence prominence_of(const std::vector<double>& y, std::size_t peak) {
  const double h = y[peak];
  double left_min = h;
  std::size_t left_base = peak;
  for (std::size_t j = peak; j-- > 0;) {
    if (y[j] > h) break;
    if (y[j] < left_min) {
      left_min = y[j];
      left_base = j;
    }
  }
  double right_min = h;
  std::size_t right_base = peak;
  for (std::size_t j = peak + 1; j < y.size(); ++j) {
    if (y[j] > h) break;
    if (y[j] < right_min) {
      right_min = y[j];
      right_base = j;
    }
  }
  return {h - std::max(left_min, right_min), left_base, right_base};
}

// Frequency where the curve crosses eval_height between adjacent samples,
// searching outwards from the peak within [left_base, right_base].
inline double width_hz_of(const std::vector<double>& y, const std::vector<double>& f,
                          std::size_t peak, const Prominence& prom, double rel_height = 0.5) {
  const double eval_height = y[peak] - rel_height * prom.value;

  double left_f = f[prom.left_base];
  for (std::size_t j = peak; j > prom.left_base; --j) {
    if (y[j - 1] < eval_height) {
      const double t = (y[j] - eval_height) / (y[j] - y[j - 1]);
      left_f = f[j] + t * (f[j - 1] - f[j]);
      break;
    }
  }
  double right_f = f[prom.right_base];
  for (std::size_t j = peak; j < prom.right_base; ++j) {
    if (y[j + 1] < eval_height) {
      const double t = (y[j] - eval_height) / (y[j] - y[j + 1]);
      right_f = f[j] + t * (f[j + 1] - f[j]);
      break;
    }
  }
  return right_f - left_f;
}

}  // namespace detail

// Dominant peaks of a frequency-domain metric curve: interior local maxima
// (plateaus resolved to their midpoint) at or above height_frac of the curve
// maximum, thinned tallest-first so survivors are pairwise at least
// min_separation_hz apart (ties broken toward lower frequency). Width is
// measured where the curve crosses half the peak's prominence, linearly
// interpolated between bins. The DC bin is excluded unless include_dc is set.
inline std::vector<Peak> detect_peaks(const FrequencySeries& curve, double height_frac = 0.5,
                                      double min_separation_hz = 10.0, bool include_dc = false) {
  // Compact to valid bins; neighbor relations are between consecutive valid bins.
  std::vector<double> y, f;
  y.reserve(curve.size());
  f.reserve(curve.size());
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (!curve.valid.empty() && !curve.valid[k]) continue;
    if (!include_dc && curve.bin_freqs_hz[k] == 0.0) continue;
    y.push_back(curve.values[k]);
    f.push_back(curve.bin_freqs_hz[k]);
  }
  if (y.size() < 3) throw std::invalid_argument("detect_peaks: need at least 3 valid bins");

  double curve_max = y[0];
  for (double v : y) curve_max = std::max(curve_max, v);
  const double threshold = height_frac * curve_max;

  // Interior local maxima, strictly above both neighbors; a flat run counts
  // once, at its midpoint.
  std::vector<detail::Candidate> candidates;
  for (std::size_t i = 1; i + 1 < y.size();) {
    if (y[i] <= y[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < y.size() && y[j + 1] == y[i]) ++j;
    if (j + 1 < y.size() && y[j + 1] < y[i]) {
      const std::size_t mid = (i + j) / 2;
      if (y[mid] >= threshold) candidates.push_back({mid, y[mid]});
    }
    i = j + 1;
  }

  // Tallest first; equal heights resolved toward the lower frequency.
  std::sort(candidates.begin(), candidates.end(),
            [&](const detail::Candidate& a, const detail::Candidate& b) {
              if (a.value != b.value) return a.value > b.value;
              return f[a.index] < f[b.index];
            });

  std::vector<std::size_t> kept;
  for (const auto& c : candidates) {
    bool ok = true;
    for (std::size_t s : kept) {
      if (std::abs(f[c.index] - f[s]) < min_separation_hz) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c.index);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<Peak> peaks;
  peaks.reserve(kept.size());
  for (std::size_t idx : kept) {
    const auto prom = detail::prominence_of(y, idx);
    Peak p;
    p.freq_hz = f[idx];
    p.magnitude = y[idx];
    p.prominence = prom.value;
    p.width_hz = detail::width_hz_of(y, f, idx, prom);
    peaks.push_back(p);
  }
  return peaks;
}

// Counts of peak frequencies per fixed-width bin per label, accumulated over
// participants. The right edge of the range folds into the last bin.
inline PeakHistogram aggregate_histogram(
    const std::map<std::string, std::map<std::string, std::vector<Peak>>>& peaks_by_participant,
    double bin_width_hz = 1.0, double max_freq_hz = 100.0) {
  if (!(bin_width_hz > 0.0)) throw std::invalid_argument("aggregate_histogram: bin width must be positive");
  const std::size_t nbins = static_cast<std::size_t>(std::ceil(max_freq_hz / bin_width_hz));
  if (nbins == 0) throw std::invalid_argument("aggregate_histogram: empty range");

  PeakHistogram hist;
  hist.bin_edges_hz.resize(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i)
    hist.bin_edges_hz[i] = std::min(static_cast<double>(i) * bin_width_hz, max_freq_hz);
  hist.n_participants = static_cast<std::int64_t>(peaks_by_participant.size());

  for (const auto& [participant, by_label] : peaks_by_participant) {
    for (const auto& [label, peaks] : by_label) {
      auto& counts = hist.counts[label];
      if (counts.empty()) counts.assign(nbins, 0);
      for (const auto& p : peaks) {
        if (p.freq_hz < 0.0 || p.freq_hz > max_freq_hz)
          throw std::out_of_range("aggregate_histogram: peak at " + std::to_string(p.freq_hz) +
                                  " Hz outside [0, " + std::to_string(max_freq_hz) +
                                  "] for participant " + participant);
        std::size_t bin = static_cast<std::size_t>(std::floor(p.freq_hz / bin_width_hz));
        if (bin >= nbins) bin = nbins - 1;  // fold the right edge
        ++counts[bin];
      }
    }
  }
  return hist;
}

}  // namespace efr
