#include <complex>
#include <cstddef>

namespace matterwave::simd::detail {

void cscale_scalar(std::complex<double> a, std::complex<double>* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void caxpy_scalar(std::complex<double> a, const std::complex<double>* x,
                  std::complex<double>* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_mixed_scalar(const double* ur, const double* ui, const double* zr,
                        const double* zi, std::size_t n) {
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pos += ur[i] * zr[i];
    neg += ui[i] * zi[i];
  }
  return pos - neg;
}

}  // namespace matterwave::simd::detail
