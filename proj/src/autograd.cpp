#include "rsl/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "rsl/kernels.hpp"

namespace rsl {

namespace {

// C[m x n] = A[m x k] B[k x n] via one transpose of B.
void mat_nn(const double* a, const double* b, double* c, std::size_t m,
            std::size_t n, std::size_t k) {
  std::vector<double> bt(n * k);
  kernels::transpose(b, bt.data(), k, n);
  kernels::gemm_nt(a, bt.data(), c, m, n, k);
}

}  // namespace

NodeId Tape::emplace(Tensor value, bool requires_grad,
                     std::function<void(Tape&)> backward_fn) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backward_fn = std::move(backward_fn);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

Tensor& Tape::grad_ref(NodeId id) {
  Node& node = nodes_[id];
  if (node.grad.data.empty()) {
    node.grad = Tensor(node.value.shape);
  }
  return node.grad;
}

NodeId Tape::input(Tensor value) { return emplace(std::move(value), false, nullptr); }

NodeId Tape::leaf(Tensor value) { return emplace(std::move(value), true, nullptr); }

NodeId Tape::linear(NodeId x, NodeId w, NodeId b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  if (xv.rank() != 2 || wv.rank() != 2 || xv.cols() != wv.cols()) {
    throw std::invalid_argument("linear: shape mismatch");
  }
  const std::size_t t = xv.rows(), in = xv.cols(), out = wv.rows();
  Tensor y({t, out});
  kernels::gemm_nt(xv.data.data(), wv.data.data(), y.data.data(), t, out, in);
  const bool has_bias = b != kNone;
  if (has_bias) {
    const Tensor& bv = value(b);
    if (bv.size() != out) throw std::invalid_argument("linear: bias size mismatch");
    for (std::size_t r = 0; r < t; ++r) {
      kernels::axpy(1.0, bv.data.data(), y.data.data() + r * out, out);
    }
  }
  const bool track = tracked(x) || tracked(w) || (has_bias && tracked(b));
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, x, w, b, has_bias, t, in, out](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    if (tape.tracked(x)) {
      std::vector<double> dx(t * in);
      mat_nn(dy.data.data(), tape.value(w).data.data(), dx.data(), t, in, out);
      kernels::axpy(1.0, dx.data(), tape.grad_ref(x).data.data(), t * in);
    }
    if (tape.tracked(w)) {
      std::vector<double> dyt(out * t), xt(in * t), dw(out * in);
      kernels::transpose(dy.data.data(), dyt.data(), t, out);
      kernels::transpose(tape.value(x).data.data(), xt.data(), t, in);
      kernels::gemm_nt(dyt.data(), xt.data(), dw.data(), out, in, t);
      kernels::axpy(1.0, dw.data(), tape.grad_ref(w).data.data(), out * in);
    }
    if (has_bias && tape.tracked(b)) {
      double* db = tape.grad_ref(b).data.data();
      for (std::size_t r = 0; r < t; ++r) {
        kernels::axpy(1.0, dy.data.data() + r * out, db, out);
      }
    }
  };
  return id;
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.cols()) {
    throw std::invalid_argument("matmul_nt: shape mismatch");
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  Tensor c({m, n});
  kernels::gemm_nt(av.data.data(), bv.data.data(), c.data.data(), m, n, k);
  const bool track = tracked(a) || tracked(b);
  NodeId id = emplace(std::move(c), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, b, m, n, k](Tape& tape) {
    const Tensor& dc = tape.grad(id);
    if (tape.tracked(a)) {
      std::vector<double> da(m * k);
      mat_nn(dc.data.data(), tape.value(b).data.data(), da.data(), m, k, n);
      kernels::axpy(1.0, da.data(), tape.grad_ref(a).data.data(), m * k);
    }
    if (tape.tracked(b)) {
      std::vector<double> dct(n * m), db(n * k);
      kernels::transpose(dc.data.data(), dct.data(), m, n);
      mat_nn(dct.data(), tape.value(a).data.data(), db.data(), n, k, m);
      kernels::axpy(1.0, db.data(), tape.grad_ref(b).data.data(), n * k);
    }
  };
  return id;
}

NodeId Tape::matmul_nn(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    throw std::invalid_argument("matmul_nn: shape mismatch");
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor c({m, n});
  mat_nn(av.data.data(), bv.data.data(), c.data.data(), m, n, k);
  const bool track = tracked(a) || tracked(b);
  NodeId id = emplace(std::move(c), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, b, m, n, k](Tape& tape) {
    const Tensor& dc = tape.grad(id);
    if (tape.tracked(a)) {
      // dA = dC B^T
      std::vector<double> da(m * k);
      kernels::gemm_nt(dc.data.data(), tape.value(b).data.data(), da.data(), m, k, n);
      kernels::axpy(1.0, da.data(), tape.grad_ref(a).data.data(), m * k);
    }
    if (tape.tracked(b)) {
      // dB = A^T dC
      std::vector<double> at(k * m), db(k * n);
      kernels::transpose(tape.value(a).data.data(), at.data(), m, k);
      mat_nn(at.data(), dc.data.data(), db.data(), k, n, m);
      kernels::axpy(1.0, db.data(), tape.grad_ref(b).data.data(), k * n);
    }
  };
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw std::invalid_argument("add: shape mismatch");
  Tensor y = av;
  kernels::axpy(1.0, bv.data.data(), y.data.data(), y.size());
  const bool track = tracked(a) || tracked(b);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, b](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    if (tape.tracked(a)) {
      kernels::axpy(1.0, dy.data.data(), tape.grad_ref(a).data.data(), dy.size());
    }
    if (tape.tracked(b)) {
      kernels::axpy(1.0, dy.data.data(), tape.grad_ref(b).data.data(), dy.size());
    }
  };
  return id;
}

NodeId Tape::scale(NodeId a, double s) {
  Tensor y = value(a);
  for (double& v : y.data) v *= s;
  const bool track = tracked(a);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, s](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    kernels::axpy(s, dy.data.data(), tape.grad_ref(a).data.data(), dy.size());
  };
  return id;
}

NodeId Tape::gelu(NodeId a) {
  const Tensor& av = value(a);
  Tensor y(av.shape);
  for (std::size_t i = 0; i < av.size(); ++i) {
    double x = av.data[i];
    y.data[i] = 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
  }
  const bool track = tracked(a);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    const Tensor& xv = tape.value(a);
    Tensor& da = tape.grad_ref(a);
    constexpr double kInvSqrt2Pi = 0.3989422804014327;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      double x = xv.data[i];
      double d = 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) +
                 x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
      da.data[i] += dy.data[i] * d;
    }
  };
  return id;
}

NodeId Tape::leaky_relu(NodeId a, double slope) {
  const Tensor& av = value(a);
  Tensor y(av.shape);
  for (std::size_t i = 0; i < av.size(); ++i) {
    double x = av.data[i];
    y.data[i] = x >= 0.0 ? x : slope * x;
  }
  const bool track = tracked(a);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, slope](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    const Tensor& xv = tape.value(a);
    Tensor& da = tape.grad_ref(a);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      da.data[i] += dy.data[i] * (xv.data[i] >= 0.0 ? 1.0 : slope);
    }
  };
  return id;
}

NodeId Tape::softmax_rows(NodeId a) {
  const Tensor& av = value(a);
  if (av.rank() != 2) throw std::invalid_argument("softmax_rows: need 2-D input");
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor y(av.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = av.data.data() + r * cols;
    double* yr = y.data.data() + r * cols;
    double mx = *std::max_element(xr, xr + cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    double inv = 1.0 / sum;
    for (std::size_t c = 0; c < cols; ++c) yr[c] *= inv;
  }
  const bool track = tracked(a);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, rows, cols](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    const Tensor& yv = tape.value(id);
    Tensor& da = tape.grad_ref(a);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* yr = yv.data.data() + r * cols;
      const double* dyr = dy.data.data() + r * cols;
      double* dar = da.data.data() + r * cols;
      double inner = kernels::dot(yr, dyr, cols);
      for (std::size_t c = 0; c < cols; ++c) {
        dar[c] += yr[c] * (dyr[c] - inner);
      }
    }
  };
  return id;
}

NodeId Tape::layer_norm(NodeId x, NodeId gamma, NodeId beta, double eps) {
  const Tensor& xv = value(x);
  if (xv.rank() != 2) throw std::invalid_argument("layer_norm: need 2-D input");
  const std::size_t rows = xv.rows(), cols = xv.cols();
  const Tensor& gv = value(gamma);
  const Tensor& bv = value(beta);
  if (gv.size() != cols || bv.size() != cols) {
    throw std::invalid_argument("layer_norm: scale/bias size mismatch");
  }

  Tensor y(xv.shape);
  auto xhat = std::make_shared<std::vector<double>>(rows * cols);
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data.data() + r * cols;
    double mean = kernels::sum(xr, cols) / static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double d = xr[c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t c = 0; c < cols; ++c) {
      double h = (xr[c] - mean) * inv;
      (*xhat)[r * cols + c] = h;
      y.data[r * cols + c] = gv.data[c] * h + bv.data[c];
    }
  }
  const bool track = tracked(x) || tracked(gamma) || tracked(beta);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, x, gamma, beta, rows, cols, xhat, inv_std](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    const Tensor& gv = tape.value(gamma);
    if (tape.tracked(gamma)) {
      double* dg = tape.grad_ref(gamma).data.data();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* dyr = dy.data.data() + r * cols;
        const double* hr = xhat->data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) dg[c] += dyr[c] * hr[c];
      }
    }
    if (tape.tracked(beta)) {
      double* db = tape.grad_ref(beta).data.data();
      for (std::size_t r = 0; r < rows; ++r) {
        kernels::axpy(1.0, dy.data.data() + r * cols, db, cols);
      }
    }
    if (tape.tracked(x)) {
      Tensor& dx = tape.grad_ref(x);
      std::vector<double> dxhat(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* dyr = dy.data.data() + r * cols;
        const double* hr = xhat->data() + r * cols;
        double* dxr = dx.data.data() + r * cols;
        double mean_dxhat = 0.0, mean_dxhat_h = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          dxhat[c] = dyr[c] * gv.data[c];
          mean_dxhat += dxhat[c];
          mean_dxhat_h += dxhat[c] * hr[c];
        }
        mean_dxhat /= static_cast<double>(cols);
        mean_dxhat_h /= static_cast<double>(cols);
        const double inv = (*inv_std)[r];
        for (std::size_t c = 0; c < cols; ++c) {
          dxr[c] += inv * (dxhat[c] - mean_dxhat - hr[c] * mean_dxhat_h);
        }
      }
    }
  };
  return id;
}

NodeId Tape::col_slice(NodeId a, std::size_t c0, std::size_t c1) {
  const Tensor& av = value(a);
  if (av.rank() != 2 || c0 >= c1 || c1 > av.cols()) {
    throw std::invalid_argument("col_slice: bad range");
  }
  const std::size_t rows = av.rows(), cols = av.cols(), width = c1 - c0;
  Tensor y({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data.data() + r * cols + c0, width, y.data.data() + r * width);
  }
  const bool track = tracked(a);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, c0, rows, cols, width](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    Tensor& da = tape.grad_ref(a);
    for (std::size_t r = 0; r < rows; ++r) {
      kernels::axpy(1.0, dy.data.data() + r * width, da.data.data() + r * cols + c0, width);
    }
  };
  return id;
}

NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t total = 0;
  bool track = false;
  for (NodeId p : parts) {
    const Tensor& pv = value(p);
    if (pv.rank() != 2 || pv.rows() != rows) {
      throw std::invalid_argument("concat_cols: row mismatch");
    }
    total += pv.cols();
    track = track || tracked(p);
  }
  Tensor y({rows, total});
  std::size_t offset = 0;
  for (NodeId p : parts) {
    const Tensor& pv = value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.data.data() + r * pv.cols(), pv.cols(),
                  y.data.data() + r * total + offset);
    }
    offset += pv.cols();
  }
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  std::vector<NodeId> parts_copy = parts;
  nodes_[id].backward_fn = [id, parts_copy, rows, total](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    std::size_t offset = 0;
    for (NodeId p : parts_copy) {
      const std::size_t width = tape.value(p).cols();
      if (tape.tracked(p)) {
        Tensor& dp = tape.grad_ref(p);
        for (std::size_t r = 0; r < rows; ++r) {
          kernels::axpy(1.0, dy.data.data() + r * total + offset,
                        dp.data.data() + r * width, width);
        }
      }
      offset += width;
    }
  };
  return id;
}

NodeId Tape::concat_rows(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.cols()) {
    throw std::invalid_argument("concat_rows: column mismatch");
  }
  const std::size_t ra = av.rows(), rb = bv.rows(), cols = av.cols();
  Tensor y({ra + rb, cols});
  std::copy(av.data.begin(), av.data.end(), y.data.begin());
  std::copy(bv.data.begin(), bv.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(ra * cols));
  const bool track = tracked(a) || tracked(b);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, b, ra, rb, cols](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    if (tape.tracked(a)) {
      kernels::axpy(1.0, dy.data.data(), tape.grad_ref(a).data.data(), ra * cols);
    }
    if (tape.tracked(b)) {
      kernels::axpy(1.0, dy.data.data() + ra * cols, tape.grad_ref(b).data.data(), rb * cols);
    }
  };
  return id;
}

NodeId Tape::row(NodeId a, std::size_t r) {
  const Tensor& av = value(a);
  if (av.rank() != 2 || r >= av.rows()) throw std::invalid_argument("row: out of range");
  const std::size_t cols = av.cols();
  Tensor y({1, cols});
  std::copy_n(av.data.data() + r * cols, cols, y.data.data());
  const bool track = tracked(a);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a, r, cols](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    kernels::axpy(1.0, dy.data.data(), tape.grad_ref(a).data.data() + r * cols, cols);
  };
  return id;
}

NodeId Tape::reshape(NodeId a, std::vector<std::size_t> shape) {
  const Tensor& av = value(a);
  if (Tensor::count(shape) != av.size()) {
    throw std::invalid_argument("reshape: element count mismatch");
  }
  Tensor y(std::move(shape), av.data);
  const bool track = tracked(a);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, a](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    kernels::axpy(1.0, dy.data.data(), tape.grad_ref(a).data.data(), dy.size());
  };
  return id;
}

NodeId Tape::conv2d_valid(NodeId x, NodeId kernels_id, NodeId bias) {
  const Tensor& xv = value(x);
  const Tensor& kv = value(kernels_id);
  const Tensor& bv = value(bias);
  if (xv.rank() != 3 || kv.rank() != 4 || kv.dim(1) != xv.dim(0)) {
    throw std::invalid_argument("conv2d_valid: shape mismatch");
  }
  const std::size_t c_in = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  const std::size_t c_out = kv.dim(0), kh = kv.dim(2), kw = kv.dim(3);
  if (h < kh || w < kw) throw std::invalid_argument("conv2d_valid: kernel larger than input");
  if (bv.size() != c_out) throw std::invalid_argument("conv2d_valid: bias size mismatch");
  const std::size_t ho = h - kh + 1, wo = w - kw + 1;

  Tensor y({c_out, ho, wo});
  for (std::size_t co = 0; co < c_out; ++co) {
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) y.at3(co, i, j) = bv.data[co];
    }
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      for (std::size_t dy = 0; dy < kh; ++dy) {
        const double* krow = &kv.data[((co * c_in + ci) * kh + dy) * kw];
        for (std::size_t i = 0; i < ho; ++i) {
          const double* xrow = &xv.data[(ci * h + i + dy) * w];
          double* yrow = &y.data[(co * ho + i) * wo];
          for (std::size_t j = 0; j < wo; ++j) {
            double acc = 0.0;
            for (std::size_t dx = 0; dx < kw; ++dx) acc += krow[dx] * xrow[j + dx];
            yrow[j] += acc;
          }
        }
      }
    }
  }
  const bool track = tracked(x) || tracked(kernels_id) || tracked(bias);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, x, kernels_id, bias, c_in, c_out, h, w, kh, kw, ho,
                            wo](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    const Tensor& xv = tape.value(x);
    const Tensor& kv = tape.value(kernels_id);
    if (tape.tracked(bias)) {
      Tensor& db = tape.grad_ref(bias);
      for (std::size_t co = 0; co < c_out; ++co) {
        db.data[co] += kernels::sum(&dy.data[co * ho * wo], ho * wo);
      }
    }
    if (tape.tracked(kernels_id)) {
      Tensor& dk = tape.grad_ref(kernels_id);
      for (std::size_t co = 0; co < c_out; ++co) {
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          for (std::size_t dyk = 0; dyk < kh; ++dyk) {
            for (std::size_t dxk = 0; dxk < kw; ++dxk) {
              double acc = 0.0;
              for (std::size_t i = 0; i < ho; ++i) {
                acc += kernels::dot(&dy.data[(co * ho + i) * wo],
                                    &xv.data[(ci * h + i + dyk) * w + dxk], wo);
              }
              dk.data[((co * c_in + ci) * kh + dyk) * kw + dxk] += acc;
            }
          }
        }
      }
    }
    if (tape.tracked(x)) {
      Tensor& dx = tape.grad_ref(x);
      for (std::size_t co = 0; co < c_out; ++co) {
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          for (std::size_t dyk = 0; dyk < kh; ++dyk) {
            const double* krow = &kv.data[((co * c_in + ci) * kh + dyk) * kw];
            for (std::size_t i = 0; i < ho; ++i) {
              const double* dyrow = &dy.data[(co * ho + i) * wo];
              double* dxrow = &dx.data[(ci * h + i + dyk) * w];
              for (std::size_t dxk = 0; dxk < kw; ++dxk) {
                kernels::axpy(krow[dxk], dyrow, dxrow + dxk, wo);
              }
            }
          }
        }
      }
    }
  };
  return id;
}

NodeId Tape::maxpool2x2(NodeId x) {
  const Tensor& xv = value(x);
  if (xv.rank() != 3) throw std::invalid_argument("maxpool2x2: need 3-D input");
  const std::size_t ch = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  const std::size_t ho = h / 2, wo = w / 2;
  if (ho == 0 || wo == 0) throw std::invalid_argument("maxpool2x2: input too small");

  Tensor y({ch, ho, wo});
  auto argmax = std::make_shared<std::vector<std::size_t>>(ch * ho * wo);
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) {
        std::size_t best = (c * h + 2 * i) * w + 2 * j;
        double best_v = xv.data[best];
        const std::size_t candidates[3] = {(c * h + 2 * i) * w + 2 * j + 1,
                                           (c * h + 2 * i + 1) * w + 2 * j,
                                           (c * h + 2 * i + 1) * w + 2 * j + 1};
        for (std::size_t cand : candidates) {
          if (xv.data[cand] > best_v) {
            best_v = xv.data[cand];
            best = cand;
          }
        }
        y.at3(c, i, j) = best_v;
        (*argmax)[(c * ho + i) * wo + j] = best;
      }
    }
  }
  const bool track = tracked(x);
  NodeId id = emplace(std::move(y), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, x, argmax](Tape& tape) {
    const Tensor& dy = tape.grad(id);
    Tensor& dx = tape.grad_ref(x);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      dx.data[(*argmax)[i]] += dy.data[i];
    }
  };
  return id;
}

NodeId Tape::softmax_cross_entropy(NodeId logits, std::size_t target) {
  const Tensor& lv = value(logits);
  const std::size_t n = lv.size();
  if (target >= n) throw std::invalid_argument("softmax_cross_entropy: bad target");

  auto probs = std::make_shared<std::vector<double>>(n);
  double mx = *std::max_element(lv.data.begin(), lv.data.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (*probs)[i] = std::exp(lv.data[i] - mx);
    sum += (*probs)[i];
  }
  double inv = 1.0 / sum;
  for (double& p : *probs) p *= inv;

  Tensor loss({1});
  loss.data[0] = -(lv.data[target] - mx - std::log(sum));
  const bool track = tracked(logits);
  NodeId id = emplace(std::move(loss), track, nullptr);
  if (!track) return id;
  nodes_[id].backward_fn = [id, logits, target, probs](Tape& tape) {
    const double dloss = tape.grad(id).data[0];
    Tensor& dl = tape.grad_ref(logits);
    for (std::size_t i = 0; i < probs->size(); ++i) {
      double g = (*probs)[i] - (i == target ? 1.0 : 0.0);
      dl.data[i] += dloss * g;
    }
  };
  return id;
}

void Tape::backward(NodeId loss) {
  if (value(loss).size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar");
  }
  grad_ref(loss).data[0] = 1.0;
  for (std::size_t i = loss + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.requires_grad && node.backward_fn && !node.grad.data.empty()) {
      node.backward_fn(*this);
    }
  }
  // Untouched leaves read back as zeros.
  for (Node& node : nodes_) {
    if (node.requires_grad && !node.backward_fn && node.grad.data.empty()) {
      node.grad = Tensor(node.value.shape);
    }
  }
}

}  // namespace rsl
