#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "rsl/kernels.hpp"
#include "rsl/rng.hpp"

using namespace rsl;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("scalar and simd kernels agree across lengths including tails") {
  const std::string original = kernels::active_name();
  Rng rng(7);
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                        std::size_t{15}, std::size_t{16}, std::size_t{17}, std::size_t{64},
                        std::size_t{67}, std::size_t{257}}) {
    std::vector<double> a = random_vec(n, rng);
    std::vector<double> b = random_vec(n, rng);
    std::vector<double> y0 = random_vec(n, rng);

    double dot_ref = kernels::scalar::dot(a.data(), b.data(), n);
    double sum_ref = kernels::scalar::sum(a.data(), n);
    std::vector<double> axpy_ref = y0;
    kernels::scalar::axpy(0.37, a.data(), axpy_ref.data(), n);

    if (kernels::force_backend("avx2")) {
      CHECK(kernels::dot(a.data(), b.data(), n) ==
            doctest::Approx(dot_ref).epsilon(1e-12));
      CHECK(kernels::sum(a.data(), n) == doctest::Approx(sum_ref).epsilon(1e-12));
      std::vector<double> y = y0;
      kernels::axpy(0.37, a.data(), y.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(y[i] == doctest::Approx(axpy_ref[i]).epsilon(1e-12));
      }
    }
  }
  kernels::force_backend(original);
}

TEST_CASE("gemm_nt matches a naive triple loop") {
  Rng rng(11);
  const std::size_t m = 7, n = 5, k = 13;
  std::vector<double> a = random_vec(m * k, rng);
  std::vector<double> b = random_vec(n * k, rng);
  std::vector<double> c(m * n);
  kernels::gemm_nt(a.data(), b.data(), c.data(), m, n, k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += a[i * k + t] * b[j * k + t];
      CHECK(c[i * n + j] == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("transpose round-trips") {
  Rng rng(3);
  const std::size_t r = 37, c = 53;
  std::vector<double> src = random_vec(r * c, rng);
  std::vector<double> t(r * c), back(r * c);
  kernels::transpose(src.data(), t.data(), r, c);
  kernels::transpose(t.data(), back.data(), c, r);
  CHECK(back == src);
  CHECK(t[3 * r + 2] == src[2 * c + 3]);
}

TEST_CASE("backend dispatch is forced and restored") {
  const std::string original = kernels::active_name();
  CHECK(kernels::force_backend("scalar"));
  CHECK(std::string(kernels::active_name()) == "scalar");
  CHECK_FALSE(kernels::force_backend("not-a-backend"));
  CHECK(kernels::force_backend("auto"));
  kernels::force_backend(original);
}
