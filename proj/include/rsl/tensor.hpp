#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "rsl/common.hpp"

namespace rsl {

// Dense row-major tensor of doubles. Checkpoints store f32; computation is
// f64 so the finite-difference gates have headroom.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(count(shape), 0.0);
  }
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != count(shape)) {
      throw std::invalid_argument("Tensor: data length does not match shape");
    }
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           std::multiplies<std::size_t>());
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  // 2-D accessors (rows x cols).
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  // 3-D accessor (channels x rows x cols).
  double& at3(std::size_t ch, std::size_t r, std::size_t c) {
    return data[(ch * shape[1] + r) * shape[2] + c];
  }
  double at3(std::size_t ch, std::size_t r, std::size_t c) const {
    return data[(ch * shape[1] + r) * shape[2] + c];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  void check_finite(const std::string& context) const {
    for (double v : data) {
      if (!std::isfinite(v)) {
        throw NumericError(context + ": non-finite value");
      }
    }
  }
};

}  // namespace rsl
