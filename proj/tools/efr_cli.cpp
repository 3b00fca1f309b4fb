// Batch command-line driver: stimulus envelope extraction, per-participant
// transfer-function analysis, cross-participant aggregation, and the
// synthetic-system selftest.
//
// Exit codes: 0 success, 1 analysis/oracle failure, 2 I/O error,
// 3 configuration error.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "efr/csv.hpp"
#include "efr/envelope.hpp"
#include "efr/fft.hpp"
#include "efr/ingest.hpp"
#include "efr/pipeline.hpp"
#include "efr/selftest.hpp"
#include "efr/svg.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  double window_s{1.0};
  double hop_s{0.5};
  std::string window_kind{"hann"};
  double mask_floor{1e-3};
  double peak_height_frac{0.5};
  double peak_min_sep_hz{10.0};
  double bin_width_hz{1.0};
  bool emit_plots{false};
  unsigned jobs{0};
  std::uint64_t seed{0};
};

void add_common_options(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--window-s", opts->window_s, "STFT window length in seconds")
      ->capture_default_str();
  cmd->add_option("--hop-s", opts->hop_s, "STFT hop in seconds")->capture_default_str();
  cmd->add_option("--window-kind", opts->window_kind, "STFT window: hann|hamming|rectangular")
      ->capture_default_str();
  cmd->add_option("--mask-floor", opts->mask_floor,
                  "excitation-magnitude floor (relative to global max) below which bins are masked")
      ->capture_default_str();
  cmd->add_option("--peak-height-frac", opts->peak_height_frac,
                  "peak threshold as a fraction of the curve maximum")
      ->capture_default_str();
  cmd->add_option("--peak-min-sep-hz", opts->peak_min_sep_hz,
                  "minimum separation between detected peaks in Hz")
      ->capture_default_str();
  cmd->add_option("--bin-width-hz", opts->bin_width_hz, "histogram bin width in Hz")
      ->capture_default_str();
  cmd->add_flag("--emit-plots", opts->emit_plots, "also write SVG quick-look plots");
  cmd->add_option("--jobs", opts->jobs, "worker pool size (0 = logical processors)")
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "seed for synthetic generators")->capture_default_str();
}

efr::RunConfig make_config(const CommonOpts& opts, const fs::path& manifest, const fs::path& out) {
  efr::RunConfig config;
  config.manifest_path = manifest;
  config.output_dir = out;
  config.stft.window_len_s = opts.window_s;
  config.stft.hop_s = opts.hop_s;
  config.stft.window_kind = efr::window_kind_from_string(opts.window_kind);
  config.mask_floor_ratio = opts.mask_floor;
  config.peak.height_frac = opts.peak_height_frac;
  config.peak.min_separation_hz = opts.peak_min_sep_hz;
  config.peak.bin_width_hz = opts.bin_width_hz;
  config.emit_plots = opts.emit_plots;
  config.jobs = opts.jobs;
  config.seed = opts.seed;
  efr::validate(config.stft);
  return config;
}

int cmd_envelope(const std::string& audio_path, const std::string& out_path, bool emit_plots) {
  const auto audio = efr::load_audio(audio_path);
  const auto result = efr::extract_envelope(audio);

  efr::AtomicFileWriter w(out_path);
  w.stream() << "time_s,value\n";
  const auto& env = result.envelope;
  for (std::size_t i = 0; i < env.samples.size(); ++i) {
    w.stream() << efr::format_double(static_cast<double>(i) / env.sample_rate_hz) << ','
               << efr::format_double(env.samples[i]) << '\n';
  }
  w.commit();
  std::cout << "wrote " << out_path << " (" << env.samples.size() << " samples at "
            << env.sample_rate_hz << " Hz";
  if (result.clamp_count > 0)
    std::cout << ", clamped " << result.clamp_count << " negative values, max "
              << efr::format_double(result.max_clamp_magnitude);
  std::cout << ")\n";

  if (emit_plots) {
    const fs::path base(out_path);
    const fs::path stem = base.parent_path() / base.stem();
    efr::write_text_file(stem.string() + "_waveform.svg",
                         efr::waveform_svg(env, "stimulus envelope (200 Hz)"));

    // Spectra of the stimulus and of its envelope, 0-100 Hz view.
    auto spectrum_series = [](const efr::SignalRecord& s, double max_hz) {
      const auto spec = efr::fft::rfft(s.samples);
      efr::FrequencySeries out;
      out.kind = efr::SeriesKind::avg_magnitude;
      const double df = s.sample_rate_hz / static_cast<double>(s.samples.size());
      const std::size_t keep = std::min(
          spec.size(), static_cast<std::size_t>(max_hz / df) + 1);
      for (std::size_t k = 0; k < keep; ++k) {
        out.bin_freqs_hz.push_back(static_cast<double>(k) * df);
        out.values.push_back(std::abs(spec[k]) / static_cast<double>(s.samples.size()));
        out.valid.push_back(1);
      }
      return out;
    };
    const auto audio_spec = spectrum_series(audio, 100.0);
    const auto env_spec = spectrum_series(env, 100.0);
    efr::write_text_file(
        stem.string() + "_spectrum.svg",
        efr::line_chart_svg({{"stimulus", &audio_spec}, {"envelope", &env_spec}},
                            "stimulus and envelope spectra (0-100 Hz)", "frequency [Hz]",
                            "|X(f)| / N"));
  }
  return 0;
}

int cmd_analyze(const fs::path& manifest_path, const std::string& participant_id,
                const fs::path& out_dir, const CommonOpts& opts) {
  const auto manifest = efr::load_manifest(manifest_path);
  const auto* entry = manifest.find(participant_id);
  if (!entry) throw efr::config_error("participant not in manifest: " + participant_id);

  const auto config = make_config(opts, manifest_path, out_dir);
  const auto analysis = efr::analyze_participant(*entry, config);
  fs::create_directories(out_dir);
  const auto dir = efr::write_participant_outputs(analysis, config, out_dir);
  std::cout << "analyzed " << participant_id << " -> " << dir.string() << "\n";
  for (const auto& c : analysis.channels) {
    std::cout << "  " << c.channel << ": " << c.peaks.size() << " dominant peak(s)";
    for (const auto& p : c.peaks) std::cout << " " << efr::format_double(p.freq_hz) << "Hz";
    std::cout << "\n";
  }
  return 0;
}

int cmd_aggregate(const fs::path& manifest_path, const fs::path& out_dir, const CommonOpts& opts) {
  const auto manifest = efr::load_manifest(manifest_path);
  const auto config = make_config(opts, manifest_path, out_dir);
  const auto result = efr::run_aggregate(manifest, config, out_dir, &std::cerr);
  std::cout << "aggregated " << result.analyses.size() << " participants -> "
            << out_dir.string() << "\n";
  std::cout << "  channel histogram: " << (out_dir / "channel_peak_histogram.csv").string() << "\n";
  std::cout << "  CSD histogram:     " << (out_dir / "csd_peak_histogram.csv").string() << "\n";
  return 0;
}

int cmd_selftest(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const bool ok = efr::run_selftest(std::cout, out_dir);
  std::cout << (ok ? "selftest: all oracles passed\n" : "selftest: FAILURES detected\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"envelope-following-response analysis toolkit"};
  app.require_subcommand(1);

  std::string audio_path, out_path, participant_id;
  std::string manifest_path, out_dir;
  CommonOpts envelope_opts, analyze_opts, aggregate_opts;

  auto* envelope = app.add_subcommand("envelope", "extract a 200 Hz stimulus envelope from audio");
  envelope->add_option("audio", audio_path, "input WAV file")->required();
  envelope->add_option("out", out_path, "output CSV path")->required();
  envelope->add_flag("--emit-plots", envelope_opts.emit_plots, "also write SVG quick-look plots");

  auto* analyze = app.add_subcommand("analyze", "run the full analysis for one participant");
  analyze->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  analyze->add_option("--participant", participant_id, "participant id (e.g. s04)")->required();
  analyze->add_option("--out", out_dir, "output directory")->required();
  add_common_options(analyze, &analyze_opts);

  auto* aggregate =
      app.add_subcommand("aggregate", "analyze all participants and aggregate peak histograms");
  aggregate->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  aggregate->add_option("--out", out_dir, "output directory")->required();
  add_common_options(aggregate, &aggregate_opts);

  auto* selftest = app.add_subcommand("selftest", "run the synthetic-system oracle suite");
  selftest->add_option("--out", out_dir, "output directory for reports and pair dumps")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (envelope->parsed()) return cmd_envelope(audio_path, out_path, envelope_opts.emit_plots);
    if (analyze->parsed()) return cmd_analyze(manifest_path, participant_id, out_dir, analyze_opts);
    if (aggregate->parsed()) return cmd_aggregate(manifest_path, out_dir, aggregate_opts);
    if (selftest->parsed()) return cmd_selftest(out_dir);
  } catch (const efr::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const efr::io_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
