#pragma once

#include <cstddef>
#include <string>

// Arithmetic inner loops shared by the spectral transforms, the FIR
// filterbank, and the tensor ops. Each kernel has a scalar reference
// implementation and an AVX2 variant; the active set is chosen once at
// startup from CPUID (override with RSL_SIMD=scalar|avx2|auto).
//
// Variants may reassociate sums, so scalar and SIMD results agree only to
// rounding (equivalence-tested in tests/test_kernels.cpp). Within one
// process the dispatch is fixed, which keeps every pipeline bit-stable.

namespace rsl::kernels {

struct Backend {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
extern const Backend backend;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
extern const Backend backend;
}  // namespace avx2
#endif

// Active backend (set once, before any worker threads exist).
const Backend& active();
const char* active_name();

// Test hook; returns false if the named backend is unavailable on this CPU.
bool force_backend(const std::string& name);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline double sum(const double* x, std::size_t n) {
  return active().sum(x, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}

// C[M x N] = A[M x K] * B^T where B is given row-major as N rows of length K.
// Row-per-output layout lets every entry be one contiguous dot.
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k);

// dst[C x R] = src[R x C] transposed.
void transpose(const double* src, double* dst, std::size_t rows,
               std::size_t cols);

}  // namespace rsl::kernels
