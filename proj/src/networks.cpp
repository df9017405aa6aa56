#include "acmvl/networks.hpp"

#include <bit>
#include <string>

#include "acmvl/error.hpp"
#include "acmvl/ops.hpp"

namespace acmvl {

namespace {

std::string dims_string(const std::vector<std::size_t>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? ", " : "") + std::to_string(dims[i]);
  return s + "]";
}

void check_chain(std::span<const Matrix> weights, std::size_t input_cols, const char* what) {
  if (weights.empty()) throw ShapeError(std::string(what) + ": no layers");
  std::size_t width = input_cols;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != width) {
      throw ShapeError(std::string(what) + ": layer " + std::to_string(l) + " expects " +
                       std::to_string(weights[l].rows()) + " inputs but receives " +
                       std::to_string(width));
    }
    width = weights[l].cols();
  }
}

// Runs x through the chain. ReLU follows every layer except possibly the last.
Matrix chain_forward(const Matrix& x, std::span<const Matrix> weights, bool relu_last,
                     LayerCache& cache) {
  cache.inputs.clear();
  cache.pre.clear();
  Matrix a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix pre = matmul(a, weights[l]);
    cache.inputs.push_back(std::move(a));
    const bool activate = relu_last || l + 1 < weights.size();
    a = activate ? relu(pre) : pre;
    cache.pre.push_back(std::move(pre));
  }
  return a;
}

void check_cache(const LayerCache& cache, std::span<const Matrix> weights, std::size_t rows,
                 const char* what) {
  bool ok = cache.inputs.size() == weights.size() && cache.pre.size() == weights.size();
  for (std::size_t l = 0; ok && l < weights.size(); ++l) {
    ok = cache.inputs[l].rows() == rows && cache.inputs[l].cols() == weights[l].rows() &&
         cache.pre[l].rows() == rows && cache.pre[l].cols() == weights[l].cols();
  }
  if (!ok) throw ShapeError(std::string(what) + ": cache does not match inputs or weights");
}

// Backpropagates grad_out (gradient w.r.t. the chain output) and writes one
// gradient per weight. Returns the gradient w.r.t. the chain input.
Matrix chain_backward(const LayerCache& cache, std::span<const Matrix> weights, Matrix grad_out,
                      bool relu_last, std::vector<Matrix>& grads) {
  grads.assign(weights.size(), Matrix{});
  Matrix g = std::move(grad_out);
  for (std::size_t l = weights.size(); l-- > 0;) {
    const bool activated = relu_last || l + 1 < weights.size();
    if (activated) g = hadamard(std::move(g), relu_mask(cache.pre[l]));
    grads[l] = matmul_tn(cache.inputs[l], g);
    g = matmul_nt(g, weights[l]);
  }
  return g;
}

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

void mix_matrix(std::uint64_t& h, const Matrix& m) {
  fnv_mix(h, m.rows());
  fnv_mix(h, m.cols());
  for (double v : m.values()) fnv_mix(h, std::bit_cast<std::uint64_t>(v));
}

}  // namespace

void ArchSpec::validate() const {
  if (view_input_dims.empty()) throw ArgumentError("arch.view_input_dims: at least one view required");
  for (std::size_t v = 0; v < view_input_dims.size(); ++v) {
    if (view_input_dims[v] == 0)
      throw ArgumentError("arch.view_input_dims[" + std::to_string(v) + "]: must be >= 1");
  }
  if (encoder_dims.empty()) throw ArgumentError("arch.encoder_dims: must not be empty");
  for (std::size_t i = 0; i < encoder_dims.size(); ++i) {
    if (encoder_dims[i] == 0)
      throw ArgumentError("arch.encoder_dims[" + std::to_string(i) + "]: must be >= 1");
    if (i > 0 && encoder_dims[i] >= encoder_dims[i - 1])
      throw ArgumentError("arch.encoder_dims: widths must strictly decrease, got " +
                          dims_string(encoder_dims));
  }
  if (supervised_dims.empty()) throw ArgumentError("arch.supervised_dims: must not be empty");
  for (std::size_t i = 0; i < supervised_dims.size(); ++i) {
    if (supervised_dims[i] == 0)
      throw ArgumentError("arch.supervised_dims[" + std::to_string(i) + "]: must be >= 1");
  }
  if (joint_dim == 0) throw ArgumentError("arch.joint_dim: must be >= 1");
}

std::vector<std::size_t> ArchSpec::decoder_dims(std::size_t view) const {
  std::vector<std::size_t> dims(encoder_dims.rbegin() + 1, encoder_dims.rend());
  dims.push_back(view_input_dims.at(view));
  return dims;
}

ModelParams init_model(const ArchSpec& arch, RngSeed seed) {
  arch.validate();
  constexpr std::uint64_t kEncoderTag = 1;
  constexpr std::uint64_t kDecoderTag = 2;
  constexpr std::uint64_t kSupervisedTag = 3;

  ModelParams model;
  const std::size_t d = arch.latent_dim();
  for (std::size_t v = 0; v < arch.view_count(); ++v) {
    const RngSeed enc_seed = derive_seed(seed, kEncoderTag, v);
    const RngSeed dec_seed = derive_seed(seed, kDecoderTag, v);

    EncoderParams enc;
    std::size_t width = arch.view_input_dims[v];
    for (std::size_t l = 0; l < arch.encoder_dims.size(); ++l) {
      enc.weights.push_back(xavier_init(width, arch.encoder_dims[l], derive_seed(enc_seed, l)));
      width = arch.encoder_dims[l];
    }
    DecoderParams dec;
    width = d;
    const auto dec_dims = arch.decoder_dims(v);
    for (std::size_t l = 0; l < dec_dims.size(); ++l) {
      dec.weights.push_back(xavier_init(width, dec_dims[l], derive_seed(dec_seed, l)));
      width = dec_dims[l];
    }
    model.encoders.push_back(std::move(enc));
    model.decoders.push_back(std::move(dec));
  }

  const RngSeed sup_seed = derive_seed(seed, kSupervisedTag);
  model.sup.w_share = xavier_init(d, arch.joint_dim, derive_seed(sup_seed, 0));
  std::size_t width = arch.joint_dim;
  for (std::size_t l = 0; l < arch.supervised_dims.size(); ++l) {
    model.sup.head.push_back(
        xavier_init(width, arch.supervised_dims[l], derive_seed(sup_seed, l + 1)));
    width = arch.supervised_dims[l];
  }
  return model;
}

std::uint64_t fingerprint(const Matrix& m) {
  std::uint64_t h = kFnvOffset;
  mix_matrix(h, m);
  return h;
}

std::uint64_t fingerprint(const EncoderParams& p) {
  std::uint64_t h = kFnvOffset;
  for (const auto& w : p.weights) mix_matrix(h, w);
  return h;
}

std::uint64_t fingerprint(const DecoderParams& p) {
  std::uint64_t h = kFnvOffset ^ 0x5a5a5a5aULL;
  for (const auto& w : p.weights) mix_matrix(h, w);
  return h;
}

std::uint64_t fingerprint(const SupervisedParams& p) {
  std::uint64_t h = kFnvOffset;
  mix_matrix(h, p.w_share);
  for (const auto& w : p.head) mix_matrix(h, w);
  return h;
}

AeForward ae_forward(const Matrix& x, const EncoderParams& enc, const DecoderParams& dec) {
  check_chain(enc.weights, x.cols(), "ae_forward encoder");
  check_chain(dec.weights, enc.weights.back().cols(), "ae_forward decoder");
  if (dec.weights.back().cols() != x.cols()) {
    throw ShapeError("ae_forward: decoder outputs " + std::to_string(dec.weights.back().cols()) +
                     " features for a " + std::to_string(x.cols()) + "-feature input");
  }
  AeForward out;
  out.h = chain_forward(x, enc.weights, true, out.encoder);
  out.xhat = chain_forward(out.h, dec.weights, false, out.decoder);
  return out;
}

AeGradients ae_backward(const AeForward& fwd, const Matrix& x, const EncoderParams& enc,
                        const DecoderParams& dec) {
  check_cache(fwd.encoder, enc.weights, x.rows(), "ae_backward encoder");
  check_cache(fwd.decoder, dec.weights, x.rows(), "ae_backward decoder");
  auto [loss, grad_xhat] = recon_loss_grad(x, fwd.xhat);
  AeGradients out;
  out.loss = loss;
  Matrix grad_h = chain_backward(fwd.decoder, dec.weights, std::move(grad_xhat), false, out.decoder);
  chain_backward(fwd.encoder, enc.weights, std::move(grad_h), true, out.encoder);
  return out;
}

Matrix encode(const Matrix& x, const EncoderParams& enc) {
  check_chain(enc.weights, x.cols(), "encode");
  LayerCache scratch;
  return chain_forward(x, enc.weights, true, scratch);
}

SupForward sup_forward(std::span<const Matrix> views, std::span<const EncoderParams> encoders,
                       const SupervisedParams& sup) {
  if (views.size() != encoders.size()) {
    throw ArgumentError("sup_forward: " + std::to_string(views.size()) + " views but " +
                        std::to_string(encoders.size()) + " encoders");
  }
  if (views.empty()) throw ArgumentError("sup_forward: no views");
  SupForward out;
  out.encoders.resize(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].rows() != views[0].rows()) {
      throw ShapeError("sup_forward: view " + std::to_string(v) + " has " +
                       std::to_string(views[v].rows()) + " rows, view 0 has " +
                       std::to_string(views[0].rows()));
    }
    check_chain(encoders[v].weights, views[v].cols(), "sup_forward encoder");
    if (encoders[v].weights.back().cols() != sup.w_share.rows()) {
      throw ShapeError("sup_forward: view " + std::to_string(v) + " latent width " +
                       std::to_string(encoders[v].weights.back().cols()) +
                       " does not match shared transform " + sup.w_share.shape_string());
    }
    out.h.push_back(chain_forward(views[v], encoders[v].weights, true, out.encoders[v]));
  }
  out.fused_pre = Matrix(views[0].rows(), sup.w_share.cols());
  for (const auto& h : out.h) out.fused_pre += matmul(h, sup.w_share);
  out.z = relu(out.fused_pre);
  check_chain(sup.head, out.z.cols(), "sup_forward head");
  const Matrix logits = chain_forward(out.z, sup.head, false, out.head);
  out.yhat = softmax_rows(logits);
  return out;
}

SupGradients sup_backward(const SupForward& fwd, std::span<const Matrix> views,
                          const Matrix& labels_onehot, std::span<const EncoderParams> encoders,
                          const SupervisedParams& sup) {
  if (views.size() != encoders.size() || fwd.h.size() != views.size() ||
      fwd.encoders.size() != views.size()) {
    throw ArgumentError("sup_backward: view, encoder and cache counts disagree");
  }
  if (labels_onehot.rows() != fwd.yhat.rows()) {
    throw ShapeError("sup_backward: " + std::to_string(labels_onehot.rows()) +
                     " label rows for " + std::to_string(fwd.yhat.rows()) + " samples");
  }
  for (std::size_t v = 0; v < views.size(); ++v)
    check_cache(fwd.encoders[v], encoders[v].weights, views[v].rows(), "sup_backward encoder");
  check_cache(fwd.head, sup.head, fwd.z.rows(), "sup_backward head");

  auto [loss, grad_logits] = ce_loss_grad(fwd.yhat, labels_onehot);
  SupGradients out;
  out.loss = loss;
  Matrix grad_z = chain_backward(fwd.head, sup.head, std::move(grad_logits), false, out.head);
  const Matrix grad_fused = hadamard(std::move(grad_z), relu_mask(fwd.fused_pre));

  out.w_share = Matrix(sup.w_share.rows(), sup.w_share.cols());
  for (const auto& h : fwd.h) out.w_share += matmul_tn(h, grad_fused);

  // Every view receives the same upstream gradient through the shared matrix.
  const Matrix grad_h = matmul_nt(grad_fused, sup.w_share);
  out.encoders.resize(views.size());
  for (std::size_t v = 0; v < views.size(); ++v)
    chain_backward(fwd.encoders[v], encoders[v].weights, grad_h, true, out.encoders[v]);
  return out;
}

Matrix joint_latent(std::span<const Matrix> views, std::span<const EncoderParams> encoders,
                    const SupervisedParams& sup) {
  return sup_forward(views, encoders, sup).z;
}

Matrix one_hot(std::span<const int> labels, std::size_t class_count) {
  Matrix y(labels.size(), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
      throw ArgumentError("one_hot: label " + std::to_string(labels[i]) + " at row " +
                          std::to_string(i) + " outside [0, " + std::to_string(class_count) + ")");
    }
    y(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return y;
}

}  // namespace acmvl
