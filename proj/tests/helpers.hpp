#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "efr/types.hpp"

namespace testutil {

// Independent O(N^2) windowed DFT used as the oracle for the FFT-backed
// transform path. Deliberately kept separate from the library code.
inline std::vector<std::complex<double>> naive_windowed_dft(const std::vector<double>& frame,
                                                            const std::vector<double>& window) {
  const std::size_t n = frame.size();
  const std::size_t bins = n / 2 + 1;
  std::vector<std::complex<double>> out(bins, {0.0, 0.0});
  for (std::size_t k = 0; k < bins; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(i) / static_cast<double>(n);
      acc += frame[i] * window[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

// Direct time-domain convolution oracle (full length x+h-1).
inline std::vector<double> naive_convolve(const std::vector<double>& x,
                                          const std::vector<double>& h) {
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  return y;
}

// Complex amplitude of the f-Hz component of y over [begin, end), estimated
// by projection onto the complex exponential.
inline std::complex<double> project_tone(const std::vector<double>& y, double f, double fs,
                                         std::size_t begin, std::size_t end) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = begin; i < end; ++i) {
    const double angle = -2.0 * std::numbers::pi * f * static_cast<double>(i) / fs;
    acc += y[i] * std::complex<double>(std::cos(angle), std::sin(angle));
  }
  return acc * (2.0 / static_cast<double>(end - begin));
}

inline double rms(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(end - begin));
}

inline double rms(const std::vector<double>& x) { return rms(x, 0, x.size()); }

inline efr::SignalRecord make_tone(double freq_hz, double amp, double fs, double duration_s,
                                   double phase = 0.0, const std::string& label = "tone") {
  efr::SignalRecord s;
  s.sample_rate_hz = fs;
  s.label = label;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.samples[i] = amp * std::cos(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs + phase);
  return s;
}

inline efr::SignalRecord make_noise(double fs, double duration_s, unsigned seed,
                                    const std::string& label = "noise") {
  efr::SignalRecord s;
  s.sample_rate_hz = fs;
  s.label = label;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  s.samples.resize(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (auto& v : s.samples) v = uni(rng);
  return s;
}

// Unique scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("efr_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
