#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace efr::fft {

// Thin wrappers around FFTW double-precision transforms.
//
// Conventions:
//  - fft() is the unnormalized forward transform; ifft() divides by n so
//    ifft(fft(x)) == x.
//  - rfft() returns the one-sided spectrum of a real signal (n/2+1 bins);
//    irfft() inverts it (divides by n).
//
// FFTW's planner is not thread-safe, so plan creation/destruction is
// serialized; execution runs unlocked.

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct plan_guard {
  fftw_plan plan{nullptr};
  explicit plan_guard(fftw_plan p) : plan(p) {
    if (!plan) throw std::runtime_error("fftw plan creation failed");
  }
  ~plan_guard() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  plan_guard(const plan_guard&) = delete;
  plan_guard& operator=(const plan_guard&) = delete;
};

template <typename T>
struct fftw_buffer {
  T* data{nullptr};
  explicit fftw_buffer(std::size_t n) {
    data = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!data) throw std::bad_alloc();
  }
  ~fftw_buffer() { fftw_free(data); }
  fftw_buffer(const fftw_buffer&) = delete;
  fftw_buffer& operator=(const fftw_buffer&) = delete;
};

}  // namespace detail

inline std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x,
                                             int sign = FFTW_FORWARD) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("fft: empty input");
  detail::fftw_buffer<fftw_complex> in(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.data[i][0] = x[i].real();
    in.data[i][1] = x[i].imag();
  }
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    p = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data, sign, FFTW_ESTIMATE);
  }
  detail::plan_guard guard(p);
  fftw_execute(p);
  std::vector<std::complex<double>> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = {out.data[i][0], out.data[i][1]};
  return y;
}

inline std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x) {
  auto y = fft(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : y) v *= scale;
  return y;
}

inline std::vector<std::complex<double>> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("rfft: empty input");
  const std::size_t k = n / 2 + 1;
  detail::fftw_buffer<double> in(n);
  detail::fftw_buffer<fftw_complex> out(k);
  std::copy(x.begin(), x.end(), in.data);
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data, out.data, FFTW_ESTIMATE);
  }
  detail::plan_guard guard(p);
  fftw_execute(p);
  std::vector<std::complex<double>> y(k);
  for (std::size_t i = 0; i < k; ++i) y[i] = {out.data[i][0], out.data[i][1]};
  return y;
}

// Inverse of rfft for a length-n real signal; X must hold n/2+1 bins.
// Imaginary parts of the DC and Nyquist bins are ignored.
inline std::vector<double> irfft(std::span<const std::complex<double>> X, std::size_t n) {
  if (n == 0) throw std::invalid_argument("irfft: zero output length");
  const std::size_t k = n / 2 + 1;
  if (X.size() != k) throw std::invalid_argument("irfft: spectrum size does not match output length");
  detail::fftw_buffer<fftw_complex> in(k);
  detail::fftw_buffer<double> out(n);
  for (std::size_t i = 0; i < k; ++i) {
    in.data[i][0] = X[i].real();
    in.data[i][1] = X[i].imag();
  }
  in.data[0][1] = 0.0;
  if (n % 2 == 0) in.data[k - 1][1] = 0.0;
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    p = fftw_plan_dft_c2r_1d(static_cast<int>(n), in.data, out.data, FFTW_ESTIMATE);
  }
  detail::plan_guard guard(p);
  fftw_execute(p);
  std::vector<double> y(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = out.data[i] * scale;
  return y;
}

// Linear convolution of x with h via overlap-add, result length x+h-1.
inline std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) throw std::invalid_argument("convolve: empty input");
  const std::size_t nx = x.size(), nh = h.size();
  const std::size_t ny = nx + nh - 1;

  // Small kernels: direct form is cheaper than planning transforms.
  if (nh <= 64 || nx <= 2 * nh) {
    std::vector<double> y(ny, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < nh; ++j) y[i + j] += xi * h[j];
    }
    return y;
  }

  std::size_t block = 8192;
  while (block < 4 * nh) block *= 2;
  const std::size_t step = block - nh + 1;
  const std::size_t nbins = block / 2 + 1;

  std::vector<double> hp(block, 0.0);
  std::copy(h.begin(), h.end(), hp.begin());
  const auto H = rfft(hp);

  detail::fftw_buffer<double> in(block), back(block);
  detail::fftw_buffer<fftw_complex> spec(nbins);
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(block), in.data, spec.data, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(block), spec.data, back.data, FFTW_ESTIMATE);
  }
  detail::plan_guard fwd_guard(fwd), inv_guard(inv);

  std::vector<double> y(ny, 0.0);
  const double scale = 1.0 / static_cast<double>(block);
  for (std::size_t start = 0; start < nx; start += step) {
    const std::size_t len = std::min(step, nx - start);
    std::fill(in.data, in.data + block, 0.0);
    std::copy(x.begin() + start, x.begin() + start + len, in.data);
    fftw_execute(fwd);
    for (std::size_t i = 0; i < nbins; ++i) {
      const std::complex<double> v{spec.data[i][0], spec.data[i][1]};
      const auto prod = v * H[i];
      spec.data[i][0] = prod.real();
      spec.data[i][1] = prod.imag();
    }
    fftw_execute(inv);
    const std::size_t out_len = std::min(len + nh - 1, ny - start);
    for (std::size_t i = 0; i < out_len; ++i) y[start + i] += back.data[i] * scale;
  }
  return y;
}

}  // namespace efr::fft
