#pragma once

// Plain-loop reference forward passes and random tiny instances for the
// gradient checks. Shares nothing with the library's layer helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "acmvl/networks.hpp"
#include "acmvl/ops.hpp"
#include "support/finite_diff.hpp"

namespace acmvl::testing {

inline constexpr double kKinkMargin = 1e-3;
inline constexpr double kGradTol = 1e-4;

struct Instance {
  ArchSpec arch;
  ModelParams model;
  std::vector<Matrix> views;
  std::vector<int> labels;
};

// Small random network and data: V = 2, N <= 4, widths <= 6, K <= 3,
// encoder depth 1..3.
inline Instance random_instance(std::uint64_t seed) {
  Rng rng(RngSeed{seed});
  Instance inst;
  const std::size_t n = 2 + rng.below(3);
  for (int v = 0; v < 2; ++v) inst.arch.view_input_dims.push_back(3 + rng.below(4));
  const std::size_t depth = 1 + rng.below(3);
  inst.arch.encoder_dims.clear();
  std::size_t width = 4 + rng.below(3);
  for (std::size_t l = 0; l < depth; ++l) {
    inst.arch.encoder_dims.push_back(width);
    width = std::max<std::size_t>(1, width - 1 - rng.below(2));
    if (width >= inst.arch.encoder_dims.back()) break;
  }
  inst.arch.joint_dim = 2 + rng.below(4);
  const std::size_t k = 2 + rng.below(2);
  inst.arch.supervised_dims.clear();
  const std::size_t head_hidden = rng.below(3);
  for (std::size_t l = 0; l < head_hidden; ++l) inst.arch.supervised_dims.push_back(2 + rng.below(5));
  inst.arch.supervised_dims.push_back(k);
  inst.model = init_model(inst.arch, RngSeed{seed * 31 + 7});
  for (std::size_t dim : inst.arch.view_input_dims) {
    Matrix x(n, dim);
    for (auto& e : x.values()) e = rng.uniform01();
    inst.views.push_back(std::move(x));
  }
  for (std::size_t i = 0; i < n; ++i) inst.labels.push_back(static_cast<int>(rng.below(k)));
  return inst;
}

inline bool kink_free(const LayerCache& cache) {
  for (const auto& pre : cache.pre)
    for (double v : pre.values())
      if (std::abs(v) < kKinkMargin) return false;
  return true;
}

inline bool ae_kink_free(const Instance& inst, std::size_t v) {
  const AeForward f = ae_forward(inst.views[v], inst.model.encoders[v], inst.model.decoders[v]);
  return kink_free(f.encoder) && kink_free(f.decoder);
}

inline bool sup_kink_free(const Instance& inst) {
  const SupForward f = sup_forward(inst.views, inst.model.encoders, inst.model.sup);
  for (const auto& c : f.encoders)
    if (!kink_free(c)) return false;
  for (double v : f.fused_pre.values())
    if (std::abs(v) < kKinkMargin) return false;
  return kink_free(f.head);
}

// Independent re-implementation of the forward loss: plain loops over the
// layer definitions, sharing nothing with the library's chain helpers.
inline Matrix dense(const Matrix& x, const Matrix& w, bool activate) {
  Matrix out(x.rows(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) s += x(i, k) * w(k, j);
      out(i, j) = activate ? std::max(0.0, s) : s;
    }
  return out;
}

inline double oracle_recon(const Matrix& x, const EncoderParams& enc, const DecoderParams& dec) {
  Matrix a = x;
  for (const auto& w : enc.weights) a = dense(a, w, true);
  for (std::size_t l = 0; l < dec.weights.size(); ++l)
    a = dense(a, dec.weights[l], l + 1 < dec.weights.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = a.values()[i] - x.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

inline double oracle_ce(const std::vector<Matrix>& views, const std::vector<EncoderParams>& encs,
                 const SupervisedParams& sup, const std::vector<int>& labels) {
  Matrix fused(views[0].rows(), sup.w_share.cols());
  for (std::size_t v = 0; v < views.size(); ++v) {
    Matrix a = views[v];
    for (const auto& w : encs[v].weights) a = dense(a, w, true);
    const Matrix p = dense(a, sup.w_share, false);
    for (std::size_t i = 0; i < fused.size(); ++i) fused.values()[i] += p.values()[i];
  }
  Matrix a = fused;
  for (auto& e : a.values()) e = std::max(0.0, e);
  for (std::size_t l = 0; l < sup.head.size(); ++l) a = dense(a, sup.head[l], l + 1 < sup.head.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double mx = a(i, 0);
    for (std::size_t j = 1; j < a.cols(); ++j) mx = std::max(mx, a(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) z += std::exp(a(i, j) - mx);
    const double p = std::exp(a(i, static_cast<std::size_t>(labels[i])) - mx) / z;
    total -= std::log(p + 1e-12);
  }
  return total / static_cast<double>(a.rows());
}

// Worst relative error between ae_backward and finite differences of the
// reference loss over every encoder and decoder weight of view v.
inline double ae_gradient_error(Instance& inst, std::size_t v) {
  const Matrix& x = inst.views[v];
  EncoderParams& enc = inst.model.encoders[v];
  DecoderParams& dec = inst.model.decoders[v];
  const AeGradients g = ae_backward(ae_forward(x, enc, dec), x, enc, dec);
  auto loss = [&] { return oracle_recon(x, enc, dec); };
  double worst = relative_error(g.loss, loss());
  for (std::size_t l = 0; l < enc.weights.size(); ++l)
    worst = std::max(worst, max_relative_error(g.encoder[l], numeric_gradient(enc.weights[l], loss)));
  for (std::size_t l = 0; l < dec.weights.size(); ++l)
    worst = std::max(worst, max_relative_error(g.decoder[l], numeric_gradient(dec.weights[l], loss)));
  return worst;
}

// Same for sup_backward: w_share, head, and every encoder through the fusion.
inline double sup_gradient_error(Instance& inst) {
  auto& encs = inst.model.encoders;
  auto& sup = inst.model.sup;
  const Matrix y = one_hot(inst.labels, inst.arch.class_count());
  const SupGradients g = sup_backward(sup_forward(inst.views, encs, sup), inst.views, y, encs, sup);
  auto loss = [&] { return oracle_ce(inst.views, encs, sup, inst.labels); };
  double worst = relative_error(g.loss, loss());
  worst = std::max(worst, max_relative_error(g.w_share, numeric_gradient(sup.w_share, loss)));
  for (std::size_t l = 0; l < sup.head.size(); ++l)
    worst = std::max(worst, max_relative_error(g.head[l], numeric_gradient(sup.head[l], loss)));
  for (std::size_t v = 0; v < encs.size(); ++v)
    for (std::size_t l = 0; l < encs[v].weights.size(); ++l)
      worst = std::max(worst, max_relative_error(g.encoders[v][l], numeric_gradient(encs[v].weights[l], loss)));
  return worst;
}

}  // namespace acmvl::testing
