#pragma once

#include <functional>
#include <vector>

#include "rsl/tensor.hpp"

namespace rsl {

using NodeId = std::size_t;

// Reverse-mode tape. Every op records its output value plus a closure that
// scatters the output gradient into its parents; backward() replays the tape
// in reverse creation order. One tape serves one forward pass.
class Tape {
 public:
  static constexpr NodeId kNone = static_cast<NodeId>(-1);

  // Untracked constant.
  NodeId input(Tensor value);
  // Tracked leaf (a parameter); its gradient is read back after backward().
  NodeId leaf(Tensor value);

  // y = x @ w^T + b with w stored row-per-output [out, in]; b may be empty.
  NodeId linear(NodeId x, NodeId w, NodeId b);
  NodeId matmul_nt(NodeId a, NodeId b);  // C = A B^T, A:[m,k] B:[n,k]
  NodeId matmul_nn(NodeId a, NodeId b);  // C = A B,   A:[m,k] B:[k,n]
  NodeId add(NodeId a, NodeId b);        // same shape
  NodeId scale(NodeId a, double s);
  NodeId gelu(NodeId a);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId softmax_rows(NodeId a);
  // Per-row normalisation to mean 0 / var 1, then gamma * xhat + beta.
  NodeId layer_norm(NodeId x, NodeId gamma, NodeId beta, double eps = 1e-5);
  NodeId col_slice(NodeId a, std::size_t c0, std::size_t c1);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId concat_rows(NodeId a, NodeId b);
  NodeId row(NodeId a, std::size_t r);  // one row as [1, cols]
  NodeId reshape(NodeId a, std::vector<std::size_t> shape);

  // input [C,H,W], kernels [Co,C,kh,kw] (cross-correlation, valid), bias [Co].
  NodeId conv2d_valid(NodeId x, NodeId kernels, NodeId bias);
  NodeId maxpool2x2(NodeId x);

  // Scalar node: -log softmax(logits)[target], max-subtraction stabilised.
  // logits must be [1, C] or [C].
  NodeId softmax_cross_entropy(NodeId logits, std::size_t target);

  void backward(NodeId loss);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward_fn;
  };

  NodeId emplace(Tensor value, bool requires_grad,
                 std::function<void(Tape&)> backward_fn);
  Tensor& grad_ref(NodeId id);
  bool tracked(NodeId id) const { return nodes_[id].requires_grad; }

  std::vector<Node> nodes_;
};

}  // namespace rsl
