#include "rsl/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "rsl/common.hpp"
#include "rsl/io.hpp"
#include "rsl/rng.hpp"

namespace rsl {

void ViTConfig::validate() const {
  if (grid_rows == 0 || grid_cols == 0 || patch_rows == 0 || patch_cols == 0 ||
      d_model == 0 || n_layers == 0 || n_heads == 0 || d_ff == 0 || n_classes < 2) {
    throw std::invalid_argument("ViTConfig: all dimensions must be positive");
  }
  if (grid_rows % patch_rows != 0 || grid_cols % patch_cols != 0) {
    throw std::invalid_argument("ViTConfig: grid dims must be divisible by patch dims");
  }
  if (d_model % n_heads != 0) {
    throw std::invalid_argument("ViTConfig: d_model must be divisible by n_heads");
  }
}

void BaselineCnnConfig::validate() const {
  if (in_rows == 0 || in_cols == 0 || conv1_channels == 0 || conv2_channels == 0 ||
      hidden == 0 || n_classes < 2) {
    throw std::invalid_argument("BaselineCnnConfig: all dimensions must be positive");
  }
  // conv 5x5 -> pool 2 -> conv 3x3 -> pool 2 must stay nonempty
  if (in_rows < 12 || in_cols < 12) {
    throw std::invalid_argument("BaselineCnnConfig: input too small for the stack");
  }
}

void ModelParams::add(const std::string& name, Tensor t) {
  if (index_.count(name) != 0) {
    throw std::invalid_argument("ModelParams: duplicate tensor " + name);
  }
  names_.push_back(name);
  index_.emplace(name, std::move(t));
}

Tensor& ModelParams::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ModelParams: no tensor " + name);
  return it->second;
}

const Tensor& ModelParams::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ModelParams: no tensor " + name);
  return it->second;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> ModelParams::shape_manifest()
    const {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> manifest;
  manifest.reserve(names_.size());
  for (const std::string& name : names_) manifest.emplace_back(name, index_.at(name).shape);
  return manifest;
}

ParamGrads zero_grads_like(const ModelParams& params) {
  ParamGrads grads;
  for (const std::string& name : params.names()) {
    grads.emplace(name, Tensor(params.at(name).shape));
  }
  return grads;
}

namespace {

Tensor xavier_uniform(const std::vector<std::size_t>& shape, std::size_t fan_in,
                      std::size_t fan_out, Rng& rng) {
  Tensor t(shape);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.data) v = rng.uniform(-limit, limit);
  return t;
}

Tensor normal_init(const std::vector<std::size_t>& shape, double stddev, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data) v = rng.normal(0.0, stddev);
  return t;
}

Tensor ones(const std::vector<std::size_t>& shape) {
  Tensor t(shape);
  t.fill(1.0);
  return t;
}

}  // namespace

ModelParams vit_init_params(const ViTConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams p;
  const std::size_t d = cfg.d_model;

  p.add("patch_proj.w", xavier_uniform({d, cfg.patch_dim()}, cfg.patch_dim(), d, rng));
  p.add("patch_proj.b", Tensor({d}));
  p.add("class_token", Tensor({1, d}));
  p.add("pos_embed", normal_init({cfg.n_tokens(), d}, 0.02, rng));

  for (std::size_t layer = 0; layer < cfg.n_layers; ++layer) {
    const std::string prefix = "layer" + std::to_string(layer) + ".";
    p.add(prefix + "attn.wq", xavier_uniform({d, d}, d, d, rng));
    p.add(prefix + "attn.wk", xavier_uniform({d, d}, d, d, rng));
    p.add(prefix + "attn.wv", xavier_uniform({d, d}, d, d, rng));
    p.add(prefix + "attn.wo", xavier_uniform({d, d}, d, d, rng));
    p.add(prefix + "ln1.gamma", ones({d}));
    p.add(prefix + "ln1.beta", Tensor({d}));
    p.add(prefix + "ff.w1", xavier_uniform({cfg.d_ff, d}, d, cfg.d_ff, rng));
    p.add(prefix + "ff.b1", Tensor({cfg.d_ff}));
    p.add(prefix + "ff.w2", xavier_uniform({d, cfg.d_ff}, cfg.d_ff, d, rng));
    p.add(prefix + "ff.b2", Tensor({d}));
    p.add(prefix + "ln2.gamma", ones({d}));
    p.add(prefix + "ln2.beta", Tensor({d}));
  }
  p.add("head.w", xavier_uniform({cfg.n_classes, d}, d, cfg.n_classes, rng));
  p.add("head.b", Tensor({cfg.n_classes}));
  return p;
}

ModelParams cnn_init_params(const BaselineCnnConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams p;

  const std::size_t k1 = 5, k2 = 3;
  p.add("conv1.w", xavier_uniform({cfg.conv1_channels, 1, k1, k1}, k1 * k1,
                                  k1 * k1 * cfg.conv1_channels, rng));
  p.add("conv1.b", Tensor({cfg.conv1_channels}));
  p.add("conv2.w",
        xavier_uniform({cfg.conv2_channels, cfg.conv1_channels, k2, k2},
                       k2 * k2 * cfg.conv1_channels, k2 * k2 * cfg.conv2_channels, rng));
  p.add("conv2.b", Tensor({cfg.conv2_channels}));

  const std::size_t h1 = (cfg.in_rows - k1 + 1) / 2;
  const std::size_t w1 = (cfg.in_cols - k1 + 1) / 2;
  const std::size_t h2 = (h1 - k2 + 1) / 2;
  const std::size_t w2 = (w1 - k2 + 1) / 2;
  const std::size_t flat = cfg.conv2_channels * h2 * w2;

  p.add("fc1.w", xavier_uniform({cfg.hidden, flat}, flat, cfg.hidden, rng));
  p.add("fc1.b", Tensor({cfg.hidden}));
  p.add("fc2.w", xavier_uniform({cfg.n_classes, cfg.hidden}, cfg.hidden, cfg.n_classes, rng));
  p.add("fc2.b", Tensor({cfg.n_classes}));
  return p;
}

Tensor patchify(const Tensor& grid, const ViTConfig& cfg) {
  if (grid.rank() != 2 || grid.rows() != cfg.grid_rows || grid.cols() != cfg.grid_cols) {
    throw std::invalid_argument("patchify: grid does not match config");
  }
  const std::size_t pr = cfg.patch_rows, pc = cfg.patch_cols;
  const std::size_t rows_of_patches = cfg.grid_rows / pr;
  const std::size_t cols_of_patches = cfg.grid_cols / pc;
  Tensor out({rows_of_patches * cols_of_patches, pr * pc});
  std::size_t patch = 0;
  for (std::size_t br = 0; br < rows_of_patches; ++br) {
    for (std::size_t bc = 0; bc < cols_of_patches; ++bc, ++patch) {
      double* dst = out.data.data() + patch * pr * pc;
      for (std::size_t r = 0; r < pr; ++r) {
        const double* src = grid.data.data() + (br * pr + r) * cfg.grid_cols + bc * pc;
        std::copy_n(src, pc, dst + r * pc);
      }
    }
  }
  return out;
}

namespace {

// One encoder block with the printed post-norm rule:
// x <- LayerNorm(x + MHSA(x)); x <- LayerNorm(x + FFN(x)).
NodeId encoder_block(Tape& tape, NodeId x, const std::string& prefix,
                     const std::map<std::string, NodeId>& ids, const ViTConfig& cfg) {
  const std::size_t dh = cfg.d_model / cfg.n_heads;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  NodeId q = tape.linear(x, ids.at(prefix + "attn.wq"), Tape::kNone);
  NodeId k = tape.linear(x, ids.at(prefix + "attn.wk"), Tape::kNone);
  NodeId v = tape.linear(x, ids.at(prefix + "attn.wv"), Tape::kNone);

  std::vector<NodeId> heads;
  heads.reserve(cfg.n_heads);
  for (std::size_t h = 0; h < cfg.n_heads; ++h) {
    NodeId qh = tape.col_slice(q, h * dh, (h + 1) * dh);
    NodeId kh = tape.col_slice(k, h * dh, (h + 1) * dh);
    NodeId vh = tape.col_slice(v, h * dh, (h + 1) * dh);
    NodeId scores = tape.scale(tape.matmul_nt(qh, kh), attn_scale);
    NodeId probs = tape.softmax_rows(scores);
    heads.push_back(tape.matmul_nn(probs, vh));
  }
  NodeId attn = tape.linear(tape.concat_cols(heads), ids.at(prefix + "attn.wo"), Tape::kNone);
  x = tape.layer_norm(tape.add(x, attn), ids.at(prefix + "ln1.gamma"),
                      ids.at(prefix + "ln1.beta"));

  NodeId ff = tape.linear(tape.gelu(tape.linear(x, ids.at(prefix + "ff.w1"),
                                                ids.at(prefix + "ff.b1"))),
                          ids.at(prefix + "ff.w2"), ids.at(prefix + "ff.b2"));
  return tape.layer_norm(tape.add(x, ff), ids.at(prefix + "ln2.gamma"),
                         ids.at(prefix + "ln2.beta"));
}

std::map<std::string, NodeId> make_leaves(Tape& tape, const ModelParams& params) {
  std::map<std::string, NodeId> ids;
  for (const std::string& name : params.names()) {
    ids.emplace(name, tape.leaf(params.at(name)));
  }
  return ids;
}

}  // namespace

NodeId vit_build(Tape& tape, const Tensor& grid, const ModelParams& params,
                 const ViTConfig& cfg, std::map<std::string, NodeId>* leaf_ids) {
  cfg.validate();
  std::map<std::string, NodeId> ids = make_leaves(tape, params);

  NodeId patches = tape.input(patchify(grid, cfg));
  NodeId embedded = tape.linear(patches, ids.at("patch_proj.w"), ids.at("patch_proj.b"));
  NodeId tokens = tape.concat_rows(ids.at("class_token"), embedded);
  NodeId x = tape.add(tokens, ids.at("pos_embed"));

  for (std::size_t layer = 0; layer < cfg.n_layers; ++layer) {
    x = encoder_block(tape, x, "layer" + std::to_string(layer) + ".", ids, cfg);
    for (double v : tape.value(x).data) {
      if (!std::isfinite(v)) {
        throw NumericError("vit_forward: non-finite activation after layer " +
                           std::to_string(layer));
      }
    }
  }
  NodeId cls = tape.row(x, 0);
  NodeId logits = tape.linear(cls, ids.at("head.w"), ids.at("head.b"));
  if (leaf_ids != nullptr) *leaf_ids = std::move(ids);
  return logits;
}

NodeId cnn_build(Tape& tape, const Tensor& grid, const ModelParams& params,
                 const BaselineCnnConfig& cfg, std::map<std::string, NodeId>* leaf_ids) {
  cfg.validate();
  if (grid.rank() != 2 || grid.rows() != cfg.in_rows || grid.cols() != cfg.in_cols) {
    throw std::invalid_argument("baseline_cnn_forward: grid does not match config");
  }
  std::map<std::string, NodeId> ids = make_leaves(tape, params);

  NodeId x = tape.input(Tensor({1, cfg.in_rows, cfg.in_cols}, grid.data));
  x = tape.conv2d_valid(x, ids.at("conv1.w"), ids.at("conv1.b"));
  x = tape.leaky_relu(x, cfg.leaky_slope);
  x = tape.maxpool2x2(x);
  x = tape.conv2d_valid(x, ids.at("conv2.w"), ids.at("conv2.b"));
  x = tape.leaky_relu(x, cfg.leaky_slope);
  x = tape.maxpool2x2(x);
  x = tape.reshape(x, {1, tape.value(x).size()});
  x = tape.leaky_relu(tape.linear(x, ids.at("fc1.w"), ids.at("fc1.b")), cfg.leaky_slope);
  NodeId logits = tape.linear(x, ids.at("fc2.w"), ids.at("fc2.b"));
  if (leaf_ids != nullptr) *leaf_ids = std::move(ids);
  return logits;
}

Tensor vit_forward(const Tensor& grid, const ModelParams& params, const ViTConfig& cfg) {
  Tape tape;
  NodeId logits = vit_build(tape, grid, params, cfg);
  Tensor out({cfg.n_classes}, tape.value(logits).data);
  out.check_finite("vit_forward logits");
  return out;
}

Tensor baseline_cnn_forward(const Tensor& grid, const ModelParams& params,
                            const BaselineCnnConfig& cfg) {
  Tape tape;
  NodeId logits = cnn_build(tape, grid, params, cfg);
  Tensor out({cfg.n_classes}, tape.value(logits).data);
  out.check_finite("baseline_cnn_forward logits");
  return out;
}

Tensor multi_head_self_attention(const Tensor& tokens, const Tensor& wq,
                                 const Tensor& wk, const Tensor& wv,
                                 const Tensor& wo, std::size_t n_heads) {
  if (tokens.rank() != 2) throw std::invalid_argument("multi_head_self_attention: 2-D tokens");
  const std::size_t d = tokens.cols();
  if (n_heads == 0 || d % n_heads != 0 || wq.rows() != d || wq.cols() != d ||
      !wq.same_shape(wk) || !wq.same_shape(wv) || !wq.same_shape(wo)) {
    throw std::invalid_argument("multi_head_self_attention: shape mismatch");
  }
  Tape tape;
  NodeId x = tape.input(tokens);
  NodeId q = tape.linear(x, tape.input(wq), Tape::kNone);
  NodeId k = tape.linear(x, tape.input(wk), Tape::kNone);
  NodeId v = tape.linear(x, tape.input(wv), Tape::kNone);
  const std::size_t dh = d / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<NodeId> heads;
  for (std::size_t h = 0; h < n_heads; ++h) {
    NodeId qh = tape.col_slice(q, h * dh, (h + 1) * dh);
    NodeId kh = tape.col_slice(k, h * dh, (h + 1) * dh);
    NodeId vh = tape.col_slice(v, h * dh, (h + 1) * dh);
    NodeId probs = tape.softmax_rows(tape.scale(tape.matmul_nt(qh, kh), scale));
    heads.push_back(tape.matmul_nn(probs, vh));
  }
  NodeId out = tape.linear(tape.concat_cols(heads), tape.input(wo), Tape::kNone);
  return tape.value(out);
}

std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> p(logits.size());
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::pair<double, std::vector<double>> softmax_cross_entropy(
    const std::vector<double>& logits, std::size_t target) {
  if (target >= logits.size()) {
    throw std::invalid_argument("softmax_cross_entropy: target out of range");
  }
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  double loss = -(logits[target] - mx - std::log(sum));
  std::vector<double> grad = softmax(logits);
  grad[target] -= 1.0;
  return {loss, std::move(grad)};
}

namespace {

void wr_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t rd_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::string out = "RSLM";
  wr_u32le(out, static_cast<std::uint32_t>(params.size()));
  for (const std::string& name : params.names()) {
    const Tensor& t = params.at(name);
    wr_u32le(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    wr_u32le(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) wr_u32le(out, static_cast<std::uint32_t>(d));
    for (double v : t.data) {
      float f = static_cast<float>(v);
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof(f));
      wr_u32le(out, bits);
    }
  }
  io::atomic_write(path, out);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 8 || std::memcmp(p, "RSLM", 4) != 0) {
    throw FormatError(path.string() + ": not an RSLM checkpoint");
  }
  std::size_t off = 4;
  auto need = [&](std::size_t n) {
    if (off + n > size) throw FormatError(path.string() + ": truncated checkpoint");
  };
  need(4);
  const std::uint32_t count = rd_u32le(p + off);
  off += 4;

  ModelParams params;
  for (std::uint32_t i = 0; i < count; ++i) {
    need(4);
    const std::uint32_t name_len = rd_u32le(p + off);
    off += 4;
    need(name_len);
    std::string name(reinterpret_cast<const char*>(p + off), name_len);
    off += name_len;
    need(4);
    const std::uint32_t rank = rd_u32le(p + off);
    off += 4;
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      need(4);
      shape[d] = rd_u32le(p + off);
      off += 4;
    }
    Tensor t(shape);
    need(4 * t.size());
    for (double& v : t.data) {
      float f;
      std::uint32_t bits = rd_u32le(p + off);
      std::memcpy(&f, &bits, sizeof(f));
      v = static_cast<double>(f);
      off += 4;
    }
    params.add(name, std::move(t));
  }
  return params;
}

}  // namespace rsl
