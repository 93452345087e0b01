// AVX2 + FMA variants; this translation unit alone is built with -mavx2 -mfma.
// interleaved complex layout: [re0, im0, re1, im1] per 256-bit lane pair.
#include <complex>
#include <cstddef>

#if defined(MATTERWAVE_HAVE_AVX2)
#include <immintrin.h>

namespace matterwave::simd::detail {

namespace {

// per 128-bit half: (re*ar - im*ai, im*ar + re*ai)
inline __m256d cmul4(__m256d x, __m256d ar, __m256d ai) {
  const __m256d swapped = _mm256_permute_pd(x, 0b0101);
  return _mm256_fmaddsub_pd(x, ar, _mm256_mul_pd(swapped, ai));
}

}  // namespace

void cscale_avx2(std::complex<double> a, std::complex<double>* x, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  auto* p = reinterpret_cast<double*>(x);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2, p += 4) {
    const __m256d v = _mm256_loadu_pd(p);
    _mm256_storeu_pd(p, cmul4(v, ar, ai));
  }
  for (; i < n; ++i) x[i] *= a;
}

void caxpy_avx2(std::complex<double> a, const std::complex<double>* x,
                std::complex<double>* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  const auto* px = reinterpret_cast<const double*>(x);
  auto* py = reinterpret_cast<double*>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2, px += 4, py += 4) {
    const __m256d vx = _mm256_loadu_pd(px);
    const __m256d vy = _mm256_loadu_pd(py);
    _mm256_storeu_pd(py, _mm256_add_pd(vy, cmul4(vx, ar, ai)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_mixed_avx2(const double* ur, const double* ui, const double* zr,
                      const double* zi, std::size_t n) {
  __m256d pos = _mm256_setzero_pd();
  __m256d neg = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    pos = _mm256_fmadd_pd(_mm256_loadu_pd(ur + i), _mm256_loadu_pd(zr + i), pos);
    neg = _mm256_fmadd_pd(_mm256_loadu_pd(ui + i), _mm256_loadu_pd(zi + i), neg);
  }
  alignas(32) double buf[4];
  _mm256_store_pd(buf, pos);
  double sp = buf[0] + buf[1] + buf[2] + buf[3];
  _mm256_store_pd(buf, neg);
  double sn = buf[0] + buf[1] + buf[2] + buf[3];
  for (; i < n; ++i) {
    sp += ur[i] * zr[i];
    sn += ui[i] * zi[i];
  }
  return sp - sn;
}

}  // namespace matterwave::simd::detail

#endif  // MATTERWAVE_HAVE_AVX2
