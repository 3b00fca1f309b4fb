#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "efr/cross_spectral.hpp"
#include "efr/csv.hpp"
#include "efr/envelope.hpp"
#include "efr/ingest.hpp"
#include "efr/peaks.hpp"
#include "efr/serialization.hpp"
#include "efr/stft.hpp"
#include "efr/svg.hpp"
#include "efr/synth.hpp"
#include "efr/transfer.hpp"
#include "efr/types.hpp"

namespace efr {

struct PeakConfig {
  double height_frac{0.5};
  double min_separation_hz{10.0};
  double bin_width_hz{1.0};
};

// Effective parameters of a batch run. Defaults reproduce the reference
// configuration: 1 s windows, 0.5 s hop, 50% peak threshold, 10 Hz
// separation, the four-channel montage and its six pairs.
struct RunConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path output_dir;
  StftConfig stft;
  double mask_floor_ratio{1e-3};
  PeakConfig peak;
  std::vector<std::string> channels{"Cz", "P4", "F8", "T7"};
  std::vector<std::pair<std::string, std::string>> pairs{
      {"Cz", "P4"}, {"Cz", "F8"}, {"Cz", "T7"}, {"P4", "F8"}, {"P4", "T7"}, {"F8", "T7"}};
  bool emit_plots{false};
  unsigned jobs{0};  // 0 = logical processor count
  std::uint64_t seed{0};
  double eeg_rate_hz{200.0};
  double analysis_duration_s{120.0};
  double edge_trim_s{0.5};
  int csd_max_lag_frames{10};

  unsigned effective_jobs() const {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
  }
};

inline nlohmann::json run_config_json(const RunConfig& c) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : c.pairs) pairs.push_back(nlohmann::json::array({a, b}));
  return nlohmann::json{{"manifest_path", c.manifest_path.string()},
                        {"output_dir", c.output_dir.string()},
                        {"stft",
                         {{"window_len_s", c.stft.window_len_s},
                          {"hop_s", c.stft.hop_s},
                          {"window_kind", to_string(c.stft.window_kind)}}},
                        {"mask_floor_ratio", c.mask_floor_ratio},
                        {"peak",
                         {{"height_frac", c.peak.height_frac},
                          {"min_separation_hz", c.peak.min_separation_hz},
                          {"bin_width_hz", c.peak.bin_width_hz}}},
                        {"channels", c.channels},
                        {"pairs", std::move(pairs)},
                        {"emit_plots", c.emit_plots},
                        {"jobs", c.jobs},
                        {"seed", c.seed},
                        {"eeg_rate_hz", c.eeg_rate_hz},
                        {"analysis_duration_s", c.analysis_duration_s},
                        {"edge_trim_s", c.edge_trim_s},
                        {"csd_max_lag_frames", c.csd_max_lag_frames}};
}

struct ChannelAnalysis {
  std::string channel;
  TransferFunction tf;
  std::vector<double> log_magnitude;  // frames x bins, NaN where masked
  FrequencySeries avg_mag;
  FrequencySeries phase;
  std::vector<Peak> peaks;
};

struct PairAnalysis {
  std::string a, b;
  FrequencySeries csd_mag;           // zero-lag |R_xy|
  std::vector<double> csd_phase;     // zero-lag arg R_xy, principal value
  FrequencySeries coherence;
  std::vector<Peak> peaks;           // detected on the zero-lag CSD magnitude
};

struct ParticipantAnalysis {
  std::string participant_id;
  std::size_t envelope_clamp_count{0};
  double envelope_max_clamp{0.0};
  double effective_edge_trim_s{0.0};
  std::vector<ChannelAnalysis> channels;
  std::vector<PairAnalysis> pairs;
};

inline SignalRecord trim_edges(const SignalRecord& s, double seconds) {
  const auto cut = static_cast<std::size_t>(std::llround(seconds * s.sample_rate_hz));
  if (2 * cut >= s.samples.size())
    throw std::invalid_argument("trim_edges: signal shorter than twice the trim");
  SignalRecord out;
  out.sample_rate_hz = s.sample_rate_hz;
  out.label = s.label;
  out.samples.assign(s.samples.begin() + static_cast<std::ptrdiff_t>(cut),
                     s.samples.end() - static_cast<std::ptrdiff_t>(cut));
  return out;
}

// Full analysis of one (envelope, multi-channel EEG) recording already cut to
// the analysis window: per-channel transfer functions and their summaries,
// plus cross-spectral metrics for each configured pair.
inline ParticipantAnalysis analyze_signals(const std::string& participant_id,
                                           const SignalRecord& envelope_eeg_rate,
                                           const std::map<std::string, SignalRecord>& eeg,
                                           const RunConfig& config) {
  ParticipantAnalysis result;
  result.participant_id = participant_id;
  result.effective_edge_trim_s = config.edge_trim_s;

  const auto env = trim_edges(envelope_eeg_rate, config.edge_trim_s);
  const auto env_spec = stft(env, config.stft);

  result.channels.resize(config.channels.size());
  std::vector<std::future<void>> tasks;
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    tasks.push_back(std::async(std::launch::async, [&, i] {
      const std::string& ch = config.channels[i];
      const auto it = eeg.find(ch);
      if (it == eeg.end()) throw config_error("channel not present in recording: " + ch);
      const auto eeg_trimmed = trim_edges(it->second, config.edge_trim_s);
      const auto eeg_spec = stft(eeg_trimmed, config.stft);

      ChannelAnalysis a;
      a.channel = ch;
      a.tf = transfer_function(env_spec, eeg_spec, config.mask_floor_ratio, "envelope", ch);
      a.log_magnitude = log_magnitude_map(a.tf);
      a.avg_mag = avg_magnitude(a.tf);
      a.phase = phase_delay(env_spec, eeg_spec, a.tf.mask);
      a.peaks = detect_peaks(a.avg_mag, config.peak.height_frac, config.peak.min_separation_hz);
      result.channels[i] = std::move(a);
    }));
  }
  for (auto& t : tasks) t.get();

  auto find_channel = [&](const std::string& name) -> const ChannelAnalysis& {
    for (const auto& c : result.channels)
      if (c.channel == name) return c;
    throw config_error("pair references unknown channel: " + name);
  };

  result.pairs.resize(config.pairs.size());
  std::vector<std::future<void>> pair_tasks;
  for (std::size_t i = 0; i < config.pairs.size(); ++i) {
    pair_tasks.push_back(std::async(std::launch::async, [&, i] {
      const auto& [name_a, name_b] = config.pairs[i];
      const auto& ca = find_channel(name_a);
      const auto& cb = find_channel(name_b);

      PairAnalysis p;
      p.a = name_a;
      p.b = name_b;
      const auto r = csd(ca.tf, cb.tf, config.csd_max_lag_frames);
      p.csd_mag = csd_zero_lag_magnitude(r);
      const std::size_t zero = r.lag_index(0);
      p.csd_phase.resize(r.bins());
      for (std::size_t k = 0; k < r.bins(); ++k)
        p.csd_phase[k] = r.valid_at(zero, k) ? std::arg(r.at(zero, k))
                                             : std::numeric_limits<double>::quiet_NaN();
      p.coherence = coherence_coefficient(ca.tf, cb.tf);
      p.peaks = detect_peaks(p.csd_mag, config.peak.height_frac, config.peak.min_separation_hz);
      result.pairs[i] = std::move(p);
    }));
  }
  for (auto& t : pair_tasks) t.get();

  return result;
}

inline ParticipantAnalysis analyze_participant(const ManifestEntry& entry, const RunConfig& config) {
  const auto record = load_participant(entry, config.analysis_duration_s, config.eeg_rate_hz);
  auto env = extract_envelope(record.stimulus, config.eeg_rate_hz);

  // Honor both the configured trim and the envelope's own unreliable span,
  // applied equally to envelope and EEG so they stay time-aligned.
  RunConfig effective = config;
  effective.edge_trim_s = std::max(config.edge_trim_s, env.edge_unreliable_s);

  auto analysis = analyze_signals(entry.participant_id, env.envelope, record.channels, effective);
  analysis.envelope_clamp_count = env.clamp_count;
  analysis.envelope_max_clamp = env.max_clamp_magnitude;
  return analysis;
}

namespace pipeline_detail {

inline void write_series_csv(const std::filesystem::path& path, const FrequencySeries& s) {
  AtomicFileWriter w(path);
  w.stream() << "freq_hz,value,valid\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    w.stream() << format_double(s.bin_freqs_hz[k]) << ',' << format_double(s.values[k]) << ','
               << (s.valid.empty() || s.valid[k] ? 1 : 0) << '\n';
  }
  w.commit();
}

inline void write_logmag_csv(const std::filesystem::path& path, const ChannelAnalysis& a) {
  AtomicFileWriter w(path);
  w.stream() << "frame_index,time_s,freq_hz,log10_magnitude,valid\n";
  const auto& spec = a.tf.spec;
  for (std::size_t m = 0; m < spec.frames(); ++m) {
    for (std::size_t k = 0; k < spec.bins(); ++k) {
      const double v = a.log_magnitude[m * spec.bins() + k];
      w.stream() << m << ',' << format_double(spec.frame_times_s[m]) << ','
                 << format_double(spec.bin_freqs_hz[k]) << ',' << format_double(v) << ','
                 << (a.tf.mask.at(m, k) ? 1 : 0) << '\n';
    }
  }
  w.commit();
}

inline void write_pair_csv(const std::filesystem::path& path, const PairAnalysis& p) {
  AtomicFileWriter w(path);
  w.stream() << "freq_hz,csd_mag_zero_lag,csd_phase_zero_lag,coherence,valid\n";
  for (std::size_t k = 0; k < p.csd_mag.size(); ++k) {
    const bool valid = (p.csd_mag.valid.empty() || p.csd_mag.valid[k]) &&
                       (p.coherence.valid.empty() || p.coherence.valid[k]);
    w.stream() << format_double(p.csd_mag.bin_freqs_hz[k]) << ','
               << format_double(p.csd_mag.values[k]) << ',' << format_double(p.csd_phase[k]) << ','
               << format_double(p.coherence.values[k]) << ',' << (valid ? 1 : 0) << '\n';
  }
  w.commit();
}

inline void write_peaks_csv(const std::filesystem::path& path, const ParticipantAnalysis& a) {
  AtomicFileWriter w(path);
  w.stream() << "participant,channel,peak_freq_hz,magnitude,width_hz,prominence\n";
  auto emit = [&](const std::string& label, const std::vector<Peak>& peaks) {
    for (const auto& p : peaks) {
      w.stream() << a.participant_id << ',' << label << ',' << format_double(p.freq_hz) << ','
                 << format_double(p.magnitude) << ',' << format_double(p.width_hz) << ','
                 << format_double(p.prominence) << '\n';
    }
  };
  for (const auto& c : a.channels) emit(c.channel, c.peaks);
  for (const auto& p : a.pairs) emit(p.a + "-" + p.b, p.peaks);
  w.commit();
}

inline std::string pair_label(const PairAnalysis& p) { return p.a + "-" + p.b; }

}  // namespace pipeline_detail

// Write one participant's outputs. Everything is staged in a temp directory
// and renamed into place, so a failed analysis leaves no partial results.
inline std::filesystem::path write_participant_outputs(const ParticipantAnalysis& analysis,
                                                       const RunConfig& config,
                                                       const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  using namespace pipeline_detail;

  const fs::path final_dir = out_dir / analysis.participant_id;
  const fs::path staging = out_dir / ("." + analysis.participant_id + ".staging");
  fs::remove_all(staging);
  fs::create_directories(staging);

  try {
    {
      nlohmann::json j = run_config_json(config);
      j["participant_id"] = analysis.participant_id;
      j["envelope_clamp_count"] = analysis.envelope_clamp_count;
      j["envelope_max_clamp"] = analysis.envelope_max_clamp;
      j["effective_edge_trim_s"] = analysis.effective_edge_trim_s;
      write_text_file(staging / "config.json", j.dump(2) + "\n");
    }

    for (const auto& c : analysis.channels) {
      write_series_csv(staging / ("avg_magnitude_" + c.channel + ".csv"), c.avg_mag);
      write_series_csv(staging / ("phase_delay_" + c.channel + ".csv"), c.phase);
      write_logmag_csv(staging / ("tf_logmag_" + c.channel + ".csv"), c);
      {
        // All four transfer outputs in one JSON document per channel; masked
        // log-magnitude cells are emitted as null.
        nlohmann::json j{{"transfer_function", c.tf},
                         {"log_magnitude",
                          log_magnitude_grid_json(c.log_magnitude, c.tf.frames(), c.tf.bins())},
                         {"avg_magnitude", c.avg_mag},
                         {"phase_delay", c.phase}};
        write_text_file(staging / ("transfer_" + c.channel + ".json"), j.dump() + "\n");
      }
      if (config.emit_plots) {
        write_text_file(staging / ("tf_logmag_" + c.channel + ".svg"),
                        heatmap_svg(c.log_magnitude, c.tf.frames(), c.tf.bins(),
                                    c.tf.spec.frame_times_s, c.tf.spec.bin_freqs_hz,
                                    analysis.participant_id + " " + c.channel +
                                        " log10|H(m,k)|"));
      }
    }

    for (const auto& p : analysis.pairs)
      write_pair_csv(staging / ("csd_" + p.a + "_" + p.b + ".csv"), p);

    write_peaks_csv(staging / "peaks.csv", analysis);

    if (config.emit_plots) {
      std::vector<std::pair<std::string, const FrequencySeries*>> mags, phases, csds, cohs;
      for (const auto& c : analysis.channels) {
        mags.emplace_back(c.channel, &c.avg_mag);
        phases.emplace_back(c.channel, &c.phase);
      }
      for (const auto& p : analysis.pairs) {
        csds.emplace_back(pair_label(p), &p.csd_mag);
        cohs.emplace_back(pair_label(p), &p.coherence);
      }
      write_text_file(staging / "avg_magnitude.svg",
                      line_chart_svg(mags, analysis.participant_id + " time-averaged |H(k)|",
                                     "frequency [Hz]", "|H|"));
      write_text_file(staging / "phase_delay.svg",
                      line_chart_svg(phases, analysis.participant_id + " phase delay",
                                     "frequency [Hz]", "rad"));
      write_text_file(staging / "csd_magnitude.svg",
                      line_chart_svg(csds, analysis.participant_id + " zero-lag CSD magnitude",
                                     "frequency [Hz]", "|R_xy(0,k)|"));
      write_text_file(staging / "coherence.svg",
                      line_chart_svg(cohs, analysis.participant_id + " coherence coefficients",
                                     "frequency [Hz]", "C_xy"));
    }

    fs::remove_all(final_dir);
    fs::rename(staging, final_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return final_dir;
}

// Histogram CSV: one row per bin, one count column per label.
inline void write_histogram_csv(const std::filesystem::path& path, const PeakHistogram& hist) {
  AtomicFileWriter w(path);
  w.stream() << "bin_lo_hz,bin_hi_hz";
  for (const auto& [label, counts] : hist.counts) w.stream() << ',' << label;
  w.stream() << '\n';
  const std::size_t nbins = hist.bin_edges_hz.size() - 1;
  for (std::size_t i = 0; i < nbins; ++i) {
    w.stream() << format_double(hist.bin_edges_hz[i]) << ',' << format_double(hist.bin_edges_hz[i + 1]);
    for (const auto& [label, counts] : hist.counts) w.stream() << ',' << counts[i];
    w.stream() << '\n';
  }
  w.commit();
}

struct AggregateResult {
  PeakHistogram channel_histogram;
  PeakHistogram pair_histogram;
  std::vector<ParticipantAnalysis> analyses;
};

// Analyze every manifest participant (bounded worker pool), write per
// participant outputs, then aggregate dominant-peak histograms across
// participants for channels and channel pairs.
inline AggregateResult run_aggregate(const Manifest& manifest, const RunConfig& config,
                                     const std::filesystem::path& out_dir,
                                     std::ostream* log = nullptr) {
  if (manifest.participants.empty()) throw config_error("manifest lists no participants");
  if (manifest.participants.size() < 2 && log)
    *log << "warning: fewer than 2 participants; histograms will be trivial\n";

  std::filesystem::create_directories(out_dir);

  AggregateResult result;
  result.analyses.resize(manifest.participants.size());
  std::vector<std::exception_ptr> errors(manifest.participants.size());

  std::atomic<std::size_t> next{0};
  const unsigned n_workers =
      std::min<unsigned>(config.effective_jobs(),
                         static_cast<unsigned>(manifest.participants.size()));
  std::vector<std::thread> workers;
  for (unsigned wi = 0; wi < n_workers; ++wi) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= manifest.participants.size()) return;
        try {
          result.analyses[i] = analyze_participant(manifest.participants[i], config);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& a : result.analyses) write_participant_outputs(a, config, out_dir);

  std::map<std::string, std::map<std::string, std::vector<Peak>>> channel_peaks, pair_peaks;
  for (const auto& a : result.analyses) {
    for (const auto& c : a.channels) channel_peaks[a.participant_id][c.channel] = c.peaks;
    for (const auto& p : a.pairs)
      pair_peaks[a.participant_id][pipeline_detail::pair_label(p)] = p.peaks;
  }
  result.channel_histogram = aggregate_histogram(channel_peaks, config.peak.bin_width_hz);
  result.pair_histogram = aggregate_histogram(pair_peaks, config.peak.bin_width_hz);

  write_text_file(out_dir / "channel_peak_histogram.json",
                  nlohmann::json(result.channel_histogram).dump(2) + "\n");
  write_text_file(out_dir / "csd_peak_histogram.json",
                  nlohmann::json(result.pair_histogram).dump(2) + "\n");
  write_histogram_csv(out_dir / "channel_peak_histogram.csv", result.channel_histogram);
  write_histogram_csv(out_dir / "csd_peak_histogram.csv", result.pair_histogram);
  write_text_file(out_dir / "config.json", run_config_json(config).dump(2) + "\n");

  if (config.emit_plots) {
    write_text_file(out_dir / "channel_peak_histogram.svg",
                    histogram_svg(result.channel_histogram, "dominant peak counts per channel"));
    write_text_file(out_dir / "csd_peak_histogram.svg",
                    histogram_svg(result.pair_histogram, "dominant CSD peak counts per pair"));
  }
  return result;
}

}  // namespace efr
