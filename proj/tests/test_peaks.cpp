#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "efr/peaks.hpp"
#include "helpers.hpp"

using namespace efr;

namespace {

FrequencySeries curve_from(const std::function<double(double)>& f, int max_hz = 100) {
  FrequencySeries s;
  s.kind = SeriesKind::avg_magnitude;
  for (int k = 0; k <= max_hz; ++k) {
    s.bin_freqs_hz.push_back(k);
    s.values.push_back(f(k));
    s.valid.push_back(1);
  }
  return s;
}

}  // namespace

TEST_CASE("two dominant bumps are found, a sub-threshold one is rejected", "[peaks]") {
  const auto curve = curve_from([](double f) {
    return 4.0 * std::exp(-std::pow(f - 11.0, 2) / 2.0) +
           2.5 * std::exp(-std::pow(f - 82.0, 2) / 2.0) +
           1.5 * std::exp(-std::pow(f - 45.0, 2) / 2.0);
  });
  const auto peaks = detect_peaks(curve);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].freq_hz == 11.0);
  CHECK(peaks[0].magnitude == Catch::Approx(4.0).epsilon(1e-6));
  CHECK(peaks[1].freq_hz == 82.0);
  CHECK(peaks[1].magnitude == Catch::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("a strictly monotone curve has no interior peaks", "[peaks]") {
  const auto curve = curve_from([](double f) { return 1.0 + 0.05 * f; });
  CHECK(detect_peaks(curve).empty());
}

TEST_CASE("equal maxima closer than the separation keep the lower frequency", "[peaks]") {
  const auto curve = curve_from([](double f) {
    if (f == 40.0 || f == 45.0) return 5.0;
    return 1.0;
  });
  const auto peaks = detect_peaks(curve);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].freq_hz == 40.0);
}

TEST_CASE("plateaus resolve to their midpoint", "[peaks]") {
  const auto curve = curve_from([](double f) {
    if (f >= 30.0 && f <= 34.0) return 5.0;
    return 1.0;
  });
  const auto peaks = detect_peaks(curve);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].freq_hz == 32.0);
}

TEST_CASE("the DC bin is excluded by default", "[peaks]") {
  auto curve = curve_from([](double f) { return 2.0 * std::exp(-std::pow(f - 50.0, 2) / 8.0); });
  curve.values[0] = 100.0;  // huge DC offset artifact
  const auto peaks = detect_peaks(curve);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].freq_hz == 50.0);
}

TEST_CASE("detection is scale invariant", "[peaks]") {
  const auto base = curve_from([](double f) {
    return 3.0 * std::exp(-std::pow(f - 22.0, 2) / 6.0) +
           2.0 * std::exp(-std::pow(f - 71.0, 2) / 3.0);
  });
  auto scaled = base;
  for (auto& v : scaled.values) v *= 123.5;

  const auto p1 = detect_peaks(base);
  const auto p2 = detect_peaks(scaled);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].freq_hz == p2[i].freq_hz);
    CHECK(p2[i].magnitude == Catch::Approx(123.5 * p1[i].magnitude).epsilon(1e-12));
  }
}

TEST_CASE("width is FWHM for an isolated Gaussian bump", "[peaks]") {
  const double sigma = 4.0;
  const auto curve = curve_from(
      [&](double f) { return 5.0 * std::exp(-std::pow(f - 50.0, 2) / (2.0 * sigma * sigma)); });
  const auto peaks = detect_peaks(curve);
  REQUIRE(peaks.size() == 1);
  // Prominence equals the full height here, so half-prominence width is the
  // usual full width at half maximum.
  const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma;
  CHECK(peaks[0].width_hz == Catch::Approx(fwhm).epsilon(0.02));
  CHECK(peaks[0].prominence == Catch::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("detector contract holds over 1000 random curves", "[peaks]") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> n_bumps(1, 8);
  std::uniform_real_distribution<double> center(2.0, 98.0);
  std::uniform_real_distribution<double> width(0.6, 9.0);
  std::uniform_real_distribution<double> height(0.1, 10.0);

  for (int trial = 0; trial < 1000; ++trial) {
    const int bumps = n_bumps(rng);
    std::vector<double> cs, ws, hs;
    for (int b = 0; b < bumps; ++b) {
      cs.push_back(center(rng));
      ws.push_back(width(rng));
      hs.push_back(height(rng));
    }
    auto curve = curve_from([&](double f) {
      double v = 0.05;
      for (int b = 0; b < bumps; ++b)
        v += hs[b] * std::exp(-std::pow(f - cs[b], 2) / (2.0 * ws[b] * ws[b]));
      return v;
    });
    // Randomly invalidate a few bins.
    for (int i = 0; i < 5; ++i)
      curve.valid[static_cast<std::size_t>(uni(rng) * 100.0)] = 0;

    const auto peaks = detect_peaks(curve);
    const auto peaks_again = detect_peaks(curve);

    double curve_max = 0.0;
    for (std::size_t k = 1; k < curve.size(); ++k)
      if (curve.valid[k]) curve_max = std::max(curve_max, curve.values[k]);

    for (std::size_t i = 0; i < peaks.size(); ++i) {
      CHECK(peaks[i].magnitude >= 0.5 * curve_max);
      CHECK(peaks[i].prominence >= 0.0);
      for (std::size_t j = i + 1; j < peaks.size(); ++j)
        CHECK(std::abs(peaks[i].freq_hz - peaks[j].freq_hz) >= 10.0);
    }

    // Determinism: identical inputs, identical outputs.
    REQUIRE(peaks.size() == peaks_again.size());
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      CHECK(peaks[i].freq_hz == peaks_again[i].freq_hz);
      CHECK(peaks[i].magnitude == peaks_again[i].magnitude);
      CHECK(peaks[i].width_hz == peaks_again[i].width_hz);
      CHECK(peaks[i].prominence == peaks_again[i].prominence);
    }
  }
}

TEST_CASE("fewer than 3 valid bins is an error", "[peaks]") {
  FrequencySeries s;
  s.kind = SeriesKind::avg_magnitude;
  s.bin_freqs_hz = {0.0, 1.0, 2.0};
  s.values = {1.0, 2.0, 1.0};
  s.valid = {1, 1, 0};
  CHECK_THROWS_AS(detect_peaks(s), std::invalid_argument);
}

TEST_CASE("histogram counting", "[peaks]") {
  SECTION("single peak lands in its 1 Hz bin") {
    std::map<std::string, std::map<std::string, std::vector<Peak>>> by_participant;
    by_participant["s01"]["Cz"] = {Peak{10.4, 1.0, 2.0, 1.0}};
    const auto hist = aggregate_histogram(by_participant);
    REQUIRE(hist.bin_edges_hz.size() == 101);
    CHECK(hist.n_participants == 1);
    CHECK(hist.counts.at("Cz")[10] == 1);
    std::int64_t total = 0;
    for (auto c : hist.counts.at("Cz")) total += c;
    CHECK(total == 1);
  }

  SECTION("13 participants with alpha-band peaks sum over bins 9 and 10") {
    std::map<std::string, std::map<std::string, std::vector<Peak>>> by_participant;
    for (int i = 0; i < 13; ++i) {
      const double f = 9.0 + 2.0 * static_cast<double>(i) / 13.0;  // in [9, 11)
      by_participant["s" + std::to_string(i)]["Cz"] = {Peak{f, 1.0, 2.0, 1.0}};
    }
    const auto hist = aggregate_histogram(by_participant);
    CHECK(hist.n_participants == 13);
    CHECK(hist.counts.at("Cz")[9] + hist.counts.at("Cz")[10] == 13);
  }

  SECTION("the right edge folds into the last bin") {
    std::map<std::string, std::map<std::string, std::vector<Peak>>> by_participant;
    by_participant["s01"]["T7"] = {Peak{100.0, 1.0, 2.0, 1.0}};
    const auto hist = aggregate_histogram(by_participant);
    CHECK(hist.counts.at("T7")[99] == 1);
  }

  SECTION("an out-of-range peak is an error") {
    std::map<std::string, std::map<std::string, std::vector<Peak>>> by_participant;
    by_participant["s01"]["F8"] = {Peak{101.0, 1.0, 2.0, 1.0}};
    CHECK_THROWS_AS(aggregate_histogram(by_participant), std::out_of_range);
  }

  SECTION("total counts match total peaks per label") {
    std::map<std::string, std::map<std::string, std::vector<Peak>>> by_participant;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> f(0.0, 100.0);
    std::size_t total = 0;
    for (int p = 0; p < 7; ++p) {
      std::vector<Peak> peaks;
      for (int i = 0; i <= p; ++i) peaks.push_back(Peak{f(rng), 1.0, 1.0, 1.0});
      total += peaks.size();
      by_participant["s" + std::to_string(p)]["Cz-P4"] = peaks;
    }
    const auto hist = aggregate_histogram(by_participant);
    std::int64_t counted = 0;
    for (auto c : hist.counts.at("Cz-P4")) counted += c;
    CHECK(counted == static_cast<std::int64_t>(total));
  }
}
