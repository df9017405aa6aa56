#pragma once

// Central finite differences. Test-only: this is the independent oracle for
// the hand-derived backward passes and must not call into them.

#include <algorithm>
#include <cmath>
#include <functional>

#include "acmvl/matrix.hpp"

namespace acmvl::testing {

inline constexpr double kFdStep = 1e-4;

/// d loss / d param by (f(p + h) - f(p - h)) / 2h, one entry at a time.
inline Matrix numeric_gradient(Matrix& param, const std::function<double()>& loss,
                               double step = kFdStep) {
  Matrix grad(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    double& p = param.values()[i];
    const double saved = p;
    p = saved + step;
    const double up = loss();
    p = saved - step;
    const double down = loss();
    p = saved;
    grad.values()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps entries that are zero in
/// both (dead ReLU paths) from dividing by zero; it sits far above the
/// ~1e-12 rounding noise of the difference quotient.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, relative_error(analytic.values()[i], numeric.values()[i]));
  return worst;
}

}  // namespace acmvl::testing
