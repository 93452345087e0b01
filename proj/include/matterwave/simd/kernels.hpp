#pragma once
// runtime-dispatched array primitives used in the oracle hot loops (propagator
// table rotation, monte-carlo accumulation).  the scalar backend is the
// reference; vector backends must agree within floating-point reassociation.

#include <complex>
#include <cstddef>
#include <string>

namespace matterwave::simd {

enum class backend { scalar, avx2 };

// backend selection: MATTERWAVE_SIMD = auto | scalar | avx2 (default auto);
// requesting an unavailable backend throws std::runtime_error
backend active_backend();
const char* backend_name(backend b);
void force_backend(backend b);   // test hook; same availability rules
void reset_backend();            // back to env/auto selection
bool avx2_available();

// x[i] *= a
void cscale(std::complex<double> a, std::complex<double>* x, std::size_t n);
// y[i] += a * x[i]
void caxpy(std::complex<double> a, const std::complex<double>* x, std::complex<double>* y,
           std::size_t n);
// sum_i (ur[i]*zr[i] - ui[i]*zi[i]); the real part of a complex dot product
double dot_mixed(const double* ur, const double* ui, const double* zr, const double* zi,
                 std::size_t n);

}  // namespace matterwave::simd
