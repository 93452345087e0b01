#include "matterwave/simd/kernels.hpp"

#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>

namespace matterwave::simd {

namespace detail {
void cscale_scalar(std::complex<double>, std::complex<double>*, std::size_t);
void caxpy_scalar(std::complex<double>, const std::complex<double>*, std::complex<double>*,
                  std::size_t);
double dot_mixed_scalar(const double*, const double*, const double*, const double*,
                        std::size_t);
#if defined(MATTERWAVE_HAVE_AVX2)
void cscale_avx2(std::complex<double>, std::complex<double>*, std::size_t);
void caxpy_avx2(std::complex<double>, const std::complex<double>*, std::complex<double>*,
                std::size_t);
double dot_mixed_avx2(const double*, const double*, const double*, const double*,
                      std::size_t);
#endif
}  // namespace detail

namespace {

backend g_backend = backend::scalar;
bool g_selected = false;
std::mutex g_mutex;

bool cpu_has_avx2() {
#if defined(MATTERWAVE_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

backend select_from_env() {
  const char* env = std::getenv("MATTERWAVE_SIMD");
  const std::string req = env ? env : "auto";
  if (req == "scalar") return backend::scalar;
  if (req == "avx2") {
    if (!cpu_has_avx2()) throw std::runtime_error("MATTERWAVE_SIMD=avx2: cpu lacks avx2/fma");
    return backend::avx2;
  }
  if (req == "auto" || req.empty()) return cpu_has_avx2() ? backend::avx2 : backend::scalar;
  throw std::runtime_error("MATTERWAVE_SIMD: unknown backend '" + req + "'");
}

backend current() {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (!g_selected) {
    g_backend = select_from_env();
    g_selected = true;
  }
  return g_backend;
}

}  // namespace

backend active_backend() { return current(); }

const char* backend_name(backend b) {
  switch (b) {
    case backend::avx2: return "avx2";
    default: return "scalar";
  }
}

bool avx2_available() { return cpu_has_avx2(); }

void force_backend(backend b) {
  if (b == backend::avx2 && !cpu_has_avx2())
    throw std::runtime_error("force_backend: cpu lacks avx2/fma");
  std::lock_guard<std::mutex> lock(g_mutex);
  g_backend = b;
  g_selected = true;
}

void reset_backend() {
  std::lock_guard<std::mutex> lock(g_mutex);
  g_selected = false;
}

void cscale(std::complex<double> a, std::complex<double>* x, std::size_t n) {
#if defined(MATTERWAVE_HAVE_AVX2)
  if (current() == backend::avx2) return detail::cscale_avx2(a, x, n);
#endif
  detail::cscale_scalar(a, x, n);
}

void caxpy(std::complex<double> a, const std::complex<double>* x, std::complex<double>* y,
           std::size_t n) {
#if defined(MATTERWAVE_HAVE_AVX2)
  if (current() == backend::avx2) return detail::caxpy_avx2(a, x, y, n);
#endif
  detail::caxpy_scalar(a, x, y, n);
}

double dot_mixed(const double* ur, const double* ui, const double* zr, const double* zi,
                 std::size_t n) {
#if defined(MATTERWAVE_HAVE_AVX2)
  if (current() == backend::avx2) return detail::dot_mixed_avx2(ur, ui, zr, zi, n);
#endif
  return detail::dot_mixed_scalar(ur, ui, zr, zi, n);
}

}  // namespace matterwave::simd
