#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "efr/serialization.hpp"
#include "efr/stft.hpp"
#include "efr/types.hpp"
#include "helpers.hpp"

using namespace efr;

TEST_CASE("bin_freq maps indices to hertz", "[core]") {
  CHECK(bin_freq(0, 200.0, 200) == 0.0);
  CHECK(bin_freq(100, 200.0, 200) == 100.0);
  CHECK(bin_freq(11, 200.0, 200) == 11.0);
  CHECK(bin_freq(512, 44100.0, 4096) == Catch::Approx(512.0 * 44100.0 / 4096.0));
  CHECK_THROWS_AS(bin_freq(101, 200.0, 200), std::out_of_range);
}

TEST_CASE("a 200 Hz spectrogram with N=200 spans 0-100 Hz in 1 Hz steps", "[core]") {
  const auto sig = testutil::make_noise(200.0, 120.0, 1);
  const auto spec = stft(sig, StftConfig{});
  REQUIRE(spec.bins() == 101);
  for (std::size_t k = 0; k < spec.bins(); ++k)
    CHECK(spec.bin_freqs_hz[k] == static_cast<double>(k));
  CHECK(spec.bin_freqs_hz.front() == 0.0);
  CHECK(spec.bin_freqs_hz.back() == 100.0);

  // Frame times strictly increasing with constant hop step.
  for (std::size_t m = 1; m < spec.frames(); ++m) {
    CHECK(spec.frame_times_s[m] > spec.frame_times_s[m - 1]);
    CHECK(spec.frame_times_s[m] - spec.frame_times_s[m - 1] == Catch::Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("signal validation rejects non-finite samples and bad rates", "[core]") {
  SignalRecord s;
  s.sample_rate_hz = 200.0;
  s.label = "x";
  s.samples = {0.0, 1.0, -1.0};
  CHECK_NOTHROW(validate(s));

  s.samples[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(s), std::invalid_argument);

  s.samples[1] = 0.0;
  s.sample_rate_hz = 0.0;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

namespace {

ComplexSpectrogram random_spectrogram(unsigned seed, std::size_t frames = 7, std::size_t n = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  ComplexSpectrogram s;
  s.window_len_samples = n;
  s.hop_samples = n / 2;
  const std::size_t bins = n / 2 + 1;
  for (std::size_t m = 0; m < frames; ++m) s.frame_times_s.push_back(static_cast<double>(m) * 0.5);
  for (std::size_t k = 0; k < bins; ++k) s.bin_freqs_hz.push_back(bin_freq(k, 200.0, n));
  s.values.resize(frames * bins);
  for (auto& v : s.values) v = {uni(rng), uni(rng)};
  return s;
}

}  // namespace

TEST_CASE("JSON round-trips reproduce every core type exactly", "[core]") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);

  SECTION("SignalRecord") {
    SignalRecord s;
    s.sample_rate_hz = 200.0;
    s.label = "Cz";
    for (int i = 0; i < 257; ++i) s.samples.push_back(uni(rng));
    const json j = s;
    const auto back = j.get<SignalRecord>();
    CHECK(back.samples == s.samples);
    CHECK(back.sample_rate_hz == s.sample_rate_hz);
    CHECK(back.label == s.label);
  }

  SECTION("ComplexSpectrogram, including a full serialize-parse-serialize cycle") {
    const auto s = random_spectrogram(7);
    const json j = s;
    const auto back = j.get<ComplexSpectrogram>();
    CHECK(back.values == s.values);
    CHECK(back.frame_times_s == s.frame_times_s);
    CHECK(back.bin_freqs_hz == s.bin_freqs_hz);
    CHECK(back.window_len_samples == s.window_len_samples);
    CHECK(back.hop_samples == s.hop_samples);
    CHECK(json(back).dump() == j.dump());
  }

  SECTION("TransferFunction with mask") {
    TransferFunction tf;
    tf.spec = random_spectrogram(9);
    tf.stimulus_label = "envelope";
    tf.channel_label = "P4";
    tf.mask.rows = tf.spec.frames();
    tf.mask.cols = tf.spec.bins();
    tf.mask.floor_ratio = 1e-3;
    tf.mask.valid.resize(tf.mask.rows * tf.mask.cols);
    for (std::size_t i = 0; i < tf.mask.valid.size(); ++i) tf.mask.valid[i] = (i % 3) != 0;
    const json j = tf;
    const auto back = j.get<TransferFunction>();
    CHECK(back.spec.values == tf.spec.values);
    CHECK(back.mask.valid == tf.mask.valid);
    CHECK(back.mask.rows == tf.mask.rows);
    CHECK(back.mask.cols == tf.mask.cols);
    CHECK(back.stimulus_label == tf.stimulus_label);
    CHECK(back.channel_label == tf.channel_label);
  }

  SECTION("FrequencySeries") {
    FrequencySeries s;
    s.kind = SeriesKind::coherence;
    for (int k = 0; k <= 100; ++k) {
      s.bin_freqs_hz.push_back(k);
      s.values.push_back(std::abs(uni(rng)) / 3.0);
      s.valid.push_back(k % 5 != 0);
    }
    const json j = s;
    const auto back = j.get<FrequencySeries>();
    CHECK(back.values == s.values);
    CHECK(back.bin_freqs_hz == s.bin_freqs_hz);
    CHECK(back.valid == s.valid);
    CHECK(back.kind == s.kind);
  }

  SECTION("Peak and PeakHistogram") {
    PeakHistogram h;
    for (int i = 0; i <= 100; ++i) h.bin_edges_hz.push_back(i);
    h.counts["Cz"] = std::vector<std::int64_t>(100, 0);
    h.counts["Cz"][10] = 7;
    h.counts["P4-T7"] = std::vector<std::int64_t>(100, 1);
    h.n_participants = 13;
    const json j = h;
    const auto back = j.get<PeakHistogram>();
    CHECK(back.bin_edges_hz == h.bin_edges_hz);
    CHECK(back.counts == h.counts);
    CHECK(back.n_participants == h.n_participants);

    Peak p{10.5, 4.25, 2.0, 3.75};
    const json jp = p;
    const auto backp = jp.get<Peak>();
    CHECK(backp.freq_hz == p.freq_hz);
    CHECK(backp.magnitude == p.magnitude);
    CHECK(backp.width_hz == p.width_hz);
    CHECK(backp.prominence == p.prominence);
  }
}

TEST_CASE("complex values serialize as re/im pairs", "[core]") {
  const std::complex<double> v{1.25, -2.5};
  const json j = v;
  CHECK(j.at("re").get<double>() == 1.25);
  CHECK(j.at("im").get<double>() == -2.5);
  CHECK(j.get<std::complex<double>>() == v);
}
