#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "efr/cross_spectral.hpp"
#include "efr/stft.hpp"
#include "helpers.hpp"

using namespace efr;

namespace {

// Transfer function with explicit values and a fully (or partially) valid mask.
TransferFunction make_tf(std::size_t frames, std::size_t bins,
                         const std::function<std::complex<double>(std::size_t, std::size_t)>& f,
                         const std::string& label = "x") {
  TransferFunction tf;
  tf.channel_label = label;
  tf.spec.window_len_samples = 2 * (bins - 1);
  tf.spec.hop_samples = bins - 1;
  for (std::size_t m = 0; m < frames; ++m) tf.spec.frame_times_s.push_back(0.5 * static_cast<double>(m));
  for (std::size_t k = 0; k < bins; ++k)
    tf.spec.bin_freqs_hz.push_back(bin_freq(k, 200.0, 2 * (bins - 1)));
  tf.spec.values.resize(frames * bins);
  for (std::size_t m = 0; m < frames; ++m)
    for (std::size_t k = 0; k < bins; ++k) tf.spec.at(m, k) = f(m, k);
  tf.mask.rows = frames;
  tf.mask.cols = bins;
  tf.mask.valid.assign(frames * bins, 1);
  return tf;
}

TransferFunction random_tf(unsigned seed, std::size_t frames = 200, std::size_t bins = 101,
                           const std::string& label = "x") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.2, 3.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  return make_tf(frames, bins,
                 [&](std::size_t, std::size_t) { return std::polar(mag(rng), ph(rng)); }, label);
}

}  // namespace

TEST_CASE("zero-lag autocorrelation is the mean squared magnitude, real and non-negative",
          "[crossspectral]") {
  const auto tf = random_tf(1);
  const auto r = csd(tf, tf, 5);
  const std::size_t zero = r.lag_index(0);
  for (std::size_t k = 0; k < r.bins(); ++k) {
    REQUIRE(r.valid_at(zero, k));
    double expect = 0.0;
    for (std::size_t m = 0; m < tf.frames(); ++m) expect += std::norm(tf.spec.at(m, k));
    expect /= static_cast<double>(tf.frames());
    CHECK(r.at(zero, k).imag() == Catch::Approx(0.0).margin(1e-12));
    CHECK(r.at(zero, k).real() >= 0.0);
    CHECK(r.at(zero, k).real() == Catch::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("a constant phase offset preserves CSD magnitude and shows up negated in phase",
          "[crossspectral]") {
  const double theta = 0.8;
  const auto tf_x = random_tf(2);
  auto tf_y = tf_x;
  tf_y.channel_label = "y";
  for (auto& v : tf_y.spec.values) v *= std::polar(1.0, theta);

  const auto r_xx = csd(tf_x, tf_x, 0);
  const auto r_xy = csd(tf_x, tf_y, 0);
  const std::size_t zero_xx = r_xx.lag_index(0);
  const std::size_t zero_xy = r_xy.lag_index(0);
  for (std::size_t k = 0; k < r_xy.bins(); ++k) {
    CHECK(std::abs(r_xy.at(zero_xy, k)) ==
          Catch::Approx(r_xx.at(zero_xx, k).real()).epsilon(1e-10));
    CHECK(std::arg(r_xy.at(zero_xy, k)) == Catch::Approx(-theta).margin(1e-10));
  }
}

TEST_CASE("independent random phases give a collapsed zero-lag CSD", "[crossspectral]") {
  const std::size_t frames = 1000;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  const auto tf_x = make_tf(frames, 101, [&](std::size_t, std::size_t) {
    return std::polar(1.0, ph(rng));
  });
  const auto tf_y = make_tf(frames, 101, [&](std::size_t, std::size_t) {
    return std::polar(1.0, ph(rng));
  });
  const auto r = csd(tf_x, tf_y, 0);
  const std::size_t zero = r.lag_index(0);
  std::size_t small = 0;
  for (std::size_t k = 0; k < r.bins(); ++k)
    if (std::abs(r.at(zero, k)) <= 0.1) ++small;
  CHECK(small >= static_cast<std::size_t>(0.95 * 101));
}

TEST_CASE("CSD pairs satisfy Hermitian lag symmetry", "[crossspectral]") {
  auto tf_x = random_tf(4);
  auto tf_y = random_tf(5, 200, 101, "y");
  // Punch irregular holes in both masks.
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> pick(0, tf_x.mask.valid.size() - 1);
  for (int i = 0; i < 2000; ++i) tf_x.mask.valid[pick(rng)] = 0;
  for (int i = 0; i < 2000; ++i) tf_y.mask.valid[pick(rng)] = 0;

  const int max_lag = 7;
  const auto r_xy = csd(tf_x, tf_y, max_lag);
  const auto r_yx = csd(tf_y, tf_x, max_lag);
  for (int tau = -max_lag; tau <= max_lag; ++tau) {
    const std::size_t li_xy = r_xy.lag_index(tau);
    const std::size_t li_yx = r_yx.lag_index(-tau);
    for (std::size_t k = 0; k < r_xy.bins(); ++k) {
      REQUIRE(r_xy.valid_at(li_xy, k) == r_yx.valid_at(li_yx, k));
      if (!r_xy.valid_at(li_xy, k)) continue;
      CHECK(std::abs(r_xy.at(li_xy, k) - std::conj(r_yx.at(li_yx, k))) < 1e-10);
    }
  }
}

TEST_CASE("lag bounds are validated", "[crossspectral]") {
  const auto tf = random_tf(7, 50);
  CHECK_THROWS_AS(csd(tf, tf, 50), std::invalid_argument);
  CHECK_NOTHROW(csd(tf, tf, 49));
}

TEST_CASE("self-coherence is 1", "[crossspectral]") {
  const auto tf = random_tf(8);
  const auto c = coherence_coefficient(tf, tf);
  for (std::size_t k = 0; k < c.size(); ++k) {
    REQUIRE(c.valid[k]);
    CHECK(c.values[k] == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("coherence is invariant to gain and constant phase", "[crossspectral]") {
  const auto tf_x = random_tf(9);
  auto tf_y = tf_x;
  for (auto& v : tf_y.spec.values) v *= std::polar(4.2, -1.3);
  const auto c = coherence_coefficient(tf_x, tf_y);
  for (std::size_t k = 0; k < c.size(); ++k)
    CHECK(c.values[k] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("independent random-phase pairs have coherence near zero", "[crossspectral]") {
  const auto tf_x = random_tf(10, 1000);
  const auto tf_y = random_tf(11, 1000, 101, "y");
  const auto c = coherence_coefficient(tf_x, tf_y);
  std::size_t small = 0;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c.values[k] < 0.1) ++small;
  CHECK(small >= static_cast<std::size_t>(0.95 * 101));
}

TEST_CASE("coherence always lies in [0, 1] and is symmetric", "[crossspectral]") {
  for (unsigned seed = 20; seed < 26; ++seed) {
    auto tf_x = random_tf(seed, 64);
    auto tf_y = random_tf(seed + 100, 64, 101, "y");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, tf_x.mask.valid.size() - 1);
    for (int i = 0; i < 500; ++i) tf_x.mask.valid[pick(rng)] = 0;
    for (int i = 0; i < 500; ++i) tf_y.mask.valid[pick(rng)] = 0;

    const auto c_xy = coherence_coefficient(tf_x, tf_y);
    const auto c_yx = coherence_coefficient(tf_y, tf_x);
    for (std::size_t k = 0; k < c_xy.size(); ++k) {
      CHECK(c_xy.values[k] >= 0.0);
      CHECK(c_xy.values[k] <= 1.0);
      CHECK(std::abs(c_xy.values[k] - c_yx.values[k]) < 1e-12);
    }
  }
}

TEST_CASE("with magnitudes fixed, constant phase difference maximizes |R_xy(0,k)|",
          "[crossspectral]") {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, 0.7);

  const std::size_t frames = 120, bins = 33;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> mag_x(frames * bins), mag_y(frames * bins), phase_x(frames * bins);
    for (auto& v : mag_x) v = mag(rng);
    for (auto& v : mag_y) v = mag(rng);
    for (auto& v : phase_x) v = ph(rng);
    const double theta = ph(rng);

    const auto tf_x = make_tf(frames, bins, [&](std::size_t m, std::size_t k) {
      return std::polar(mag_x[m * bins + k], phase_x[m * bins + k]);
    });
    const auto tf_y_const = make_tf(frames, bins, [&](std::size_t m, std::size_t k) {
      return std::polar(mag_y[m * bins + k], phase_x[m * bins + k] - theta);
    });
    const auto tf_y_jitter = make_tf(frames, bins, [&](std::size_t m, std::size_t k) {
      return std::polar(mag_y[m * bins + k], phase_x[m * bins + k] - theta + jitter(rng));
    });

    const auto r_const = csd(tf_x, tf_y_const, 0);
    const auto r_jitter = csd(tf_x, tf_y_jitter, 0);
    const std::size_t zero = r_const.lag_index(0);
    for (std::size_t k = 0; k < bins; ++k) {
      CHECK(std::abs(r_const.at(zero, k)) > std::abs(r_jitter.at(zero, k)));
      // Constant phase difference attains the sum of magnitude products.
      double bound = 0.0;
      for (std::size_t m = 0; m < frames; ++m)
        bound += mag_x[m * bins + k] * mag_y[m * bins + k];
      bound /= static_cast<double>(frames);
      CHECK(std::abs(r_const.at(zero, k)) == Catch::Approx(bound).epsilon(1e-10));
    }
  }
}

TEST_CASE("coherence equals the normalized zero-lag CSD", "[crossspectral]") {
  // With a shared mask the (1/M) normalizations cancel exactly.
  auto tf_x = random_tf(31);
  auto tf_y = random_tf(32, 200, 101, "y");
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<std::size_t> pick(0, tf_x.mask.valid.size() - 1);
  for (int i = 0; i < 1500; ++i) {
    const auto idx = pick(rng);
    tf_x.mask.valid[idx] = 0;
    tf_y.mask.valid[idx] = 0;
  }

  const auto c = coherence_coefficient(tf_x, tf_y);
  const auto r_xy = csd(tf_x, tf_y, 0);
  const auto r_xx = csd(tf_x, tf_x, 0);
  const auto r_yy = csd(tf_y, tf_y, 0);
  const std::size_t zero = r_xy.lag_index(0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!c.valid[k]) continue;
    const double expect = std::abs(r_xy.at(zero, k)) /
                          std::sqrt(r_xx.at(zero, k).real() * r_yy.at(zero, k).real());
    CHECK(c.values[k] == Catch::Approx(expect).margin(1e-10));
  }
}

TEST_CASE("fully masked bins are flagged invalid in pair metrics", "[crossspectral]") {
  auto tf_x = random_tf(34, 50);
  auto tf_y = random_tf(35, 50, 101, "y");
  for (std::size_t m = 0; m < 50; ++m) tf_x.mask.set(m, 7, false);

  const auto c = coherence_coefficient(tf_x, tf_y);
  CHECK_FALSE(c.valid[7]);
  CHECK(c.values[7] == 0.0);

  const auto r = csd(tf_x, tf_y, 2);
  for (int tau = -2; tau <= 2; ++tau) CHECK_FALSE(r.valid_at(r.lag_index(tau), 7));
}
