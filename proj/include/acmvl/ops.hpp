#pragma once

#include <cstddef>

#include "acmvl/matrix.hpp"
#include "acmvl/rng.hpp"

namespace acmvl {

/// Glorot/Xavier uniform: entries i.i.d. on [-L, L], L = sqrt(6 / (fan_in + fan_out)).
Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, RngSeed seed);
double xavier_limit(std::size_t fan_in, std::size_t fan_out);

Matrix relu(Matrix x);
/// 1 where x > 0, else 0 (the derivative at exactly zero is taken as 0).
Matrix relu_mask(const Matrix& x);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& x);

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

/// Mean squared reconstruction error ||x - xhat||_F^2 / (rows * cols).
double recon_loss(const Matrix& x, const Matrix& xhat);
/// Loss plus its gradient with respect to xhat.
LossAndGrad recon_loss_grad(const Matrix& x, const Matrix& xhat);

inline constexpr double kLogClamp = 1e-12;

/// Categorical cross-entropy -(1/N) sum_ik y_ik log(yhat_ik + 1e-12).
double ce_loss(const Matrix& yhat, const Matrix& y_onehot);
/// Loss plus the gradient with respect to the pre-softmax logits, (yhat - y) / N.
LossAndGrad ce_loss_grad(const Matrix& yhat, const Matrix& y_onehot);

}  // namespace acmvl
