#include "latren/convolution.hpp"

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>

#include <fftw3.h>

namespace latren {

namespace {

// The FFTW planner is not thread safe; execution of distinct plans is.
std::mutex planner_mutex;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> direct(std::span<const double> a, std::span<const double> b, std::size_t keep) {
  std::vector<double> out(keep, 0.0);
  for (std::size_t n = 0; n < keep; ++n) {
    long double acc = 0.0L;
    const std::size_t i_lo = n >= b.size() ? n - b.size() + 1 : 0;
    const std::size_t i_hi = std::min(n, a.size() - 1);
    for (std::size_t i = i_lo; i <= i_hi; ++i) acc += static_cast<long double>(a[i]) * b[n - i];
    out[n] = static_cast<double>(acc);
  }
  return out;
}

std::vector<double> transform(std::span<const double> a, std::span<const double> b, std::size_t keep) {
  const std::size_t full = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(full);
  const std::size_t nc = n / 2 + 1;
  auto ra = fftw_buffer<double>(n);
  auto rb = fftw_buffer<double>(n);
  auto ca = fftw_buffer<fftw_complex>(nc);
  auto cb = fftw_buffer<fftw_complex>(nc);

  fftw_plan pa, pb, pinv;
  {
    std::lock_guard lock(planner_mutex);
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), ra.get(), ca.get(), FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), rb.get(), cb.get(), FFTW_ESTIMATE);
    pinv = fftw_plan_dft_c2r_1d(static_cast<int>(n), ca.get(), ra.get(), FFTW_ESTIMATE);
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t k = 0; k < nc; ++k) {
    const std::complex<double> x(ca[k][0], ca[k][1]);
    const std::complex<double> y(cb[k][0], cb[k][1]);
    const auto z = x * y;
    ca[k][0] = z.real();
    ca[k][1] = z.imag();
  }
  fftw_execute(pinv);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pinv);
  }
  std::vector<double> out(keep);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < keep; ++i) out[i] = ra[i] * scale;
  return out;
}

}  // namespace

std::vector<double> convolve_head(std::span<const double> a, std::span<const double> b,
                                  std::size_t keep, ConvolutionMethod method) {
  if (a.empty() || b.empty()) return std::vector<double>(keep, 0.0);
  keep = std::min(keep, a.size() + b.size() - 1);
  if (method == ConvolutionMethod::Auto)
    method = std::max(a.size(), b.size()) >= kTransformThreshold ? ConvolutionMethod::Transform
                                                                  : ConvolutionMethod::Direct;
  if (method == ConvolutionMethod::Direct) return direct(a, b, keep);
  // only the first `keep` outputs are needed, so longer inputs can be cut
  return transform(a.first(std::min(a.size(), keep)), b.first(std::min(b.size(), keep)), keep);
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             ConvolutionMethod method) {
  if (a.empty() || b.empty()) return {};
  return convolve_head(a, b, a.size() + b.size() - 1, method);
}

}  // namespace latren
