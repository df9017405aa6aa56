#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "acmvl/matrix.hpp"
#include "acmvl/rng.hpp"

namespace acmvl {

/// Layer widths of the per-view autoencoders and of the supervised fusion
/// network. None of the layers carry a bias.
///
/// View v's encoder maps M^v -> encoder_dims[0] -> ... -> encoder_dims.back()
/// (the latent width d, shared by all views). Its decoder mirrors the
/// encoder's hidden widths and ends at M^v, e.g. encoder [256, 64, 32]
/// gives decoder 32 -> 64 -> 256 -> M^v. The supervised net maps every
/// latent through one shared d x joint_dim matrix, sums, applies ReLU and
/// then runs head layers supervised_dims[0] -> ... -> K with a softmax at the end.
struct ArchSpec {
  std::vector<std::size_t> view_input_dims;
  std::vector<std::size_t> encoder_dims{256, 64, 32};
  std::vector<std::size_t> supervised_dims;
  std::size_t joint_dim = 32;

  /// Throws ArgumentError naming the offending field.
  void validate() const;

  std::size_t view_count() const noexcept { return view_input_dims.size(); }
  std::size_t latent_dim() const { return encoder_dims.back(); }
  std::size_t class_count() const { return supervised_dims.back(); }
  std::vector<std::size_t> decoder_dims(std::size_t view) const;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

struct EncoderParams {
  std::vector<Matrix> weights;
  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

struct DecoderParams {
  std::vector<Matrix> weights;
  friend bool operator==(const DecoderParams&, const DecoderParams&) = default;
};

struct SupervisedParams {
  Matrix w_share;
  std::vector<Matrix> head;
  friend bool operator==(const SupervisedParams&, const SupervisedParams&) = default;
};

struct ModelParams {
  std::vector<EncoderParams> encoders;
  std::vector<DecoderParams> decoders;
  SupervisedParams sup;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Xavier initialization of every matrix, each from its own derived seed.
ModelParams init_model(const ArchSpec& arch, RngSeed seed);

/// FNV-1a over shapes and raw bit patterns; equal fingerprints mean
/// bitwise-equal parameters for all practical purposes.
std::uint64_t fingerprint(const Matrix& m);
std::uint64_t fingerprint(const EncoderParams& p);
std::uint64_t fingerprint(const DecoderParams& p);
std::uint64_t fingerprint(const SupervisedParams& p);

/// Inputs and pre-activations of a chain of bias-free dense layers.
struct LayerCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre;
};

struct AeForward {
  LayerCache encoder;
  LayerCache decoder;
  Matrix h;
  Matrix xhat;
};

struct AeGradients {
  std::vector<Matrix> encoder;
  std::vector<Matrix> decoder;
  double loss = 0.0;
};

/// ReLU after every layer except the last decoder layer, which is linear.
AeForward ae_forward(const Matrix& x, const EncoderParams& enc, const DecoderParams& dec);
/// Gradients of recon_loss(x, xhat) with respect to every weight.
AeGradients ae_backward(const AeForward& fwd, const Matrix& x, const EncoderParams& enc,
                        const DecoderParams& dec);

/// Encoder output h (the latent feature) alone.
Matrix encode(const Matrix& x, const EncoderParams& enc);

struct SupForward {
  std::vector<LayerCache> encoders;
  std::vector<Matrix> h;
  Matrix fused_pre;  // sum_v h^v w_share
  Matrix z;          // ReLU(fused_pre), the joint latent representation
  LayerCache head;
  Matrix yhat;
};

struct SupGradients {
  Matrix w_share;
  std::vector<Matrix> head;
  std::vector<std::vector<Matrix>> encoders;
  double loss = 0.0;
};

SupForward sup_forward(std::span<const Matrix> views, std::span<const EncoderParams> encoders,
                       const SupervisedParams& sup);
/// Cross-entropy gradients for the supervised weights and, through the
/// fusion layer, for every encoder weight of every view.
SupGradients sup_backward(const SupForward& fwd, std::span<const Matrix> views,
                          const Matrix& labels_onehot, std::span<const EncoderParams> encoders,
                          const SupervisedParams& sup);

/// Joint latent z for the given views.
Matrix joint_latent(std::span<const Matrix> views, std::span<const EncoderParams> encoders,
                    const SupervisedParams& sup);

Matrix one_hot(std::span<const int> labels, std::size_t class_count);

}  // namespace acmvl
