#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "efr/peaks.hpp"
#include "efr/types.hpp"

// JSON mappings for the shared domain types. Complex values are written as
// {"re": x, "im": y}; matrices as nested row arrays.

namespace nlohmann {

template <>
struct adl_serializer<std::complex<double>> {
  static void to_json(json& j, const std::complex<double>& v) {
    j = json{{"re", v.real()}, {"im", v.imag()}};
  }
  static void from_json(const json& j, std::complex<double>& v) {
    v = {j.at("re").get<double>(), j.at("im").get<double>()};
  }
};

}  // namespace nlohmann

namespace efr {

using nlohmann::json;

inline void to_json(json& j, const SignalRecord& s) {
  j = json{{"samples", s.samples}, {"sample_rate_hz", s.sample_rate_hz}, {"label", s.label}};
}

inline void from_json(const json& j, SignalRecord& s) {
  j.at("samples").get_to(s.samples);
  j.at("sample_rate_hz").get_to(s.sample_rate_hz);
  j.at("label").get_to(s.label);
}

inline void to_json(json& j, const ComplexSpectrogram& s) {
  json rows = json::array();
  const std::size_t bins = s.bins();
  for (std::size_t m = 0; m < s.frames(); ++m) {
    json row = json::array();
    for (std::size_t k = 0; k < bins; ++k) row.push_back(s.at(m, k));
    rows.push_back(std::move(row));
  }
  j = json{{"values", std::move(rows)},
           {"frame_times_s", s.frame_times_s},
           {"bin_freqs_hz", s.bin_freqs_hz},
           {"window_len_samples", s.window_len_samples},
           {"hop_samples", s.hop_samples}};
}

inline void from_json(const json& j, ComplexSpectrogram& s) {
  j.at("frame_times_s").get_to(s.frame_times_s);
  j.at("bin_freqs_hz").get_to(s.bin_freqs_hz);
  j.at("window_len_samples").get_to(s.window_len_samples);
  j.at("hop_samples").get_to(s.hop_samples);
  s.values.clear();
  for (const auto& row : j.at("values"))
    for (const auto& cell : row) s.values.push_back(cell.get<std::complex<double>>());
}

inline void to_json(json& j, const TfMask& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  j = json{{"valid", std::move(rows)}, {"floor_ratio", m.floor_ratio}};
}

inline void from_json(const json& j, TfMask& m) {
  j.at("floor_ratio").get_to(m.floor_ratio);
  const auto& rows = j.at("valid");
  m.rows = rows.size();
  m.cols = m.rows > 0 ? rows.front().size() : 0;
  m.valid.clear();
  m.valid.reserve(m.rows * m.cols);
  for (const auto& row : rows)
    for (const auto& cell : row) m.valid.push_back(cell.get<int>() ? 1 : 0);
}

inline void to_json(json& j, const TransferFunction& tf) {
  to_json(j, tf.spec);
  j["stimulus_label"] = tf.stimulus_label;
  j["channel_label"] = tf.channel_label;
  j["mask"] = tf.mask;
}

inline void from_json(const json& j, TransferFunction& tf) {
  from_json(j, tf.spec);
  j.at("stimulus_label").get_to(tf.stimulus_label);
  j.at("channel_label").get_to(tf.channel_label);
  j.at("mask").get_to(tf.mask);
}

inline void to_json(json& j, const FrequencySeries& s) {
  json valid = json::array();
  for (auto v : s.valid) valid.push_back(v ? 1 : 0);
  j = json{{"values", s.values},
           {"bin_freqs_hz", s.bin_freqs_hz},
           {"kind", to_string(s.kind)},
           {"valid", std::move(valid)}};
}

inline void from_json(const json& j, FrequencySeries& s) {
  j.at("values").get_to(s.values);
  j.at("bin_freqs_hz").get_to(s.bin_freqs_hz);
  s.kind = series_kind_from_string(j.at("kind").get<std::string>());
  s.valid.clear();
  for (const auto& v : j.at("valid")) s.valid.push_back(v.get<int>() ? 1 : 0);
}

inline void to_json(json& j, const Peak& p) {
  j = json{{"freq_hz", p.freq_hz},
           {"magnitude", p.magnitude},
           {"width_hz", p.width_hz},
           {"prominence", p.prominence}};
}

inline void from_json(const json& j, Peak& p) {
  j.at("freq_hz").get_to(p.freq_hz);
  j.at("magnitude").get_to(p.magnitude);
  j.at("width_hz").get_to(p.width_hz);
  j.at("prominence").get_to(p.prominence);
}

inline void to_json(json& j, const PeakHistogram& h) {
  j = json{{"bin_edges_hz", h.bin_edges_hz},
           {"counts", h.counts},
           {"n_participants", h.n_participants}};
}

inline void from_json(const json& j, PeakHistogram& h) {
  j.at("bin_edges_hz").get_to(h.bin_edges_hz);
  j.at("counts").get_to(h.counts);
  j.at("n_participants").get_to(h.n_participants);
}

// Time-frequency log-magnitude grid with NaN cells emitted as null.
inline json log_magnitude_grid_json(const std::vector<double>& grid, std::size_t frames,
                                    std::size_t bins) {
  json rows = json::array();
  for (std::size_t m = 0; m < frames; ++m) {
    json row = json::array();
    for (std::size_t k = 0; k < bins; ++k) {
      const double v = grid[m * bins + k];
      if (std::isnan(v))
        row.push_back(nullptr);
      else
        row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace efr
