#pragma once

#include <cstddef>

#include "acmvl/matrix.hpp"

namespace acmvl {

struct AdaDeltaParams {
  double rho = 0.95;
  double eps = 1e-6;
  double lr = 1.0;
};

/// AdaDelta (Zeiler 2012) accumulators for one weight matrix, with an extra
/// learning-rate multiplier on the update:
///
///   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
///   dx      <- -lr * sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
///   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
///   x       <- x + dx
class AdaDelta {
 public:
  AdaDelta(std::size_t rows, std::size_t cols, AdaDeltaParams params = {});

  /// Applies one update to `param` in place.
  void step(Matrix& param, const Matrix& grad);

  const AdaDeltaParams& params() const noexcept { return params_; }
  const Matrix& acc_grad() const noexcept { return acc_grad_; }
  const Matrix& acc_update() const noexcept { return acc_update_; }

  friend bool operator==(const AdaDelta&, const AdaDelta&) = default;

 private:
  AdaDeltaParams params_;
  Matrix acc_grad_;
  Matrix acc_update_;
};

}  // namespace acmvl
