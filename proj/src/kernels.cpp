#include "rsl/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

namespace rsl::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Backend* select_default() {
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return &avx2::backend;
#endif
  return &scalar::backend;
}

const Backend* select_from_env() {
  const char* env = std::getenv("RSL_SIMD");
  if (env != nullptr) {
    std::string want(env);
    if (want == "scalar") return &scalar::backend;
#if defined(__x86_64__) || defined(_M_X64)
    if (want == "avx2" && cpu_has_avx2()) return &avx2::backend;
#endif
  }
  return select_default();
}

const Backend*& active_slot() {
  static const Backend* slot = select_from_env();
  return slot;
}

}  // namespace

const Backend& active() { return *active_slot(); }

const char* active_name() { return active().name; }

bool force_backend(const std::string& name) {
  if (name == "scalar") {
    active_slot() = &scalar::backend;
    return true;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (name == "avx2" && cpu_has_avx2()) {
    active_slot() = &avx2::backend;
    return true;
  }
#endif
  if (name == "auto") {
    active_slot() = select_default();
    return true;
  }
  return false;
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  const Backend& be = active();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      crow[j] = be.dot(arow, b + j * k, k);
    }
  }
}

void transpose(const double* src, double* dst, std::size_t rows,
               std::size_t cols) {
  constexpr std::size_t kBlock = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
    std::size_t r1 = std::min(rows, r0 + kBlock);
    for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
      std::size_t c1 = std::min(cols, c0 + kBlock);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
          dst[c * rows + r] = src[r * cols + c];
        }
      }
    }
  }
}

}  // namespace rsl::kernels
