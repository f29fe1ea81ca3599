#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rsl/autograd.hpp"
#include "rsl/tensor.hpp"

namespace rsl {

struct ViTConfig {
  std::size_t grid_rows = 64;
  std::size_t grid_cols = 144;
  std::size_t patch_rows = 8;
  std::size_t patch_cols = 8;
  std::size_t d_model = 512;
  std::size_t n_layers = 6;
  std::size_t n_heads = 8;
  std::size_t d_ff = 2048;
  std::size_t n_classes = 2;

  std::size_t patch_dim() const { return patch_rows * patch_cols; }
  std::size_t n_patches() const {
    return (grid_rows / patch_rows) * (grid_cols / patch_cols);
  }
  std::size_t n_tokens() const { return n_patches() + 1; }
  void validate() const;
};

struct BaselineCnnConfig {
  std::size_t in_rows = 64;
  std::size_t in_cols = 144;
  std::size_t conv1_channels = 16;
  std::size_t conv2_channels = 32;
  std::size_t hidden = 128;
  std::size_t n_classes = 2;
  double leaky_slope = 0.01;
  void validate() const;
};

// Named tensors in a fixed creation order (the shape manifest and the
// checkpoint layout both follow it).
class ModelParams {
 public:
  void add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  std::vector<std::pair<std::string, std::vector<std::size_t>>> shape_manifest() const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, Tensor> index_;
};

// Gradients / Adam moments share the parameter naming.
using ParamGrads = std::map<std::string, Tensor>;
ParamGrads zero_grads_like(const ModelParams& params);

// Xavier-uniform weights, zero biases and class token, N(0, 0.02) position
// embeddings, unit layer-norm scales; fully determined by the seed.
ModelParams vit_init_params(const ViTConfig& cfg, std::uint64_t seed);
ModelParams cnn_init_params(const BaselineCnnConfig& cfg, std::uint64_t seed);

// Non-overlapping patches in row-major patch order, each flattened row-major:
// [n_patches, patch_dim].
Tensor patchify(const Tensor& grid, const ViTConfig& cfg);

// Standard scaled dot-product attention over all heads; pure inference form.
Tensor multi_head_self_attention(const Tensor& tokens, const Tensor& wq,
                                 const Tensor& wk, const Tensor& wv,
                                 const Tensor& wo, std::size_t n_heads);

// Tape builders shared by inference and training. leaf_ids receives the tape
// node for every parameter so the caller can read gradients back.
NodeId vit_build(Tape& tape, const Tensor& grid, const ModelParams& params,
                 const ViTConfig& cfg,
                 std::map<std::string, NodeId>* leaf_ids = nullptr);
NodeId cnn_build(Tape& tape, const Tensor& grid, const ModelParams& params,
                 const BaselineCnnConfig& cfg,
                 std::map<std::string, NodeId>* leaf_ids = nullptr);

// Inference: class logits, length n_classes.
Tensor vit_forward(const Tensor& grid, const ModelParams& params,
                   const ViTConfig& cfg);
Tensor baseline_cnn_forward(const Tensor& grid, const ModelParams& params,
                            const BaselineCnnConfig& cfg);

// loss = -log softmax(logits)[target] with max-subtraction stabilisation;
// gradient = softmax - one_hot.
std::pair<double, std::vector<double>> softmax_cross_entropy(
    const std::vector<double>& logits, std::size_t target);

std::vector<double> softmax(const std::vector<double>& logits);

// Checkpoint container: magic "RSLM", u32 tensor count, then per tensor
// u32 name length + UTF-8 name, u32 rank, u32 dims, little-endian f32 data.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace rsl
