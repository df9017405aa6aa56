#include "acmvl/adadelta.hpp"

#include <cmath>
#include <string>

#include "acmvl/error.hpp"

namespace acmvl {

AdaDelta::AdaDelta(std::size_t rows, std::size_t cols, AdaDeltaParams params)
    : params_(params), acc_grad_(rows, cols), acc_update_(rows, cols) {
  if (!(params.rho > 0.0 && params.rho < 1.0))
    throw ArgumentError("adadelta: rho must lie in (0, 1), got " + std::to_string(params.rho));
  if (!(params.eps > 0.0))
    throw ArgumentError("adadelta: eps must be positive, got " + std::to_string(params.eps));
  if (!(params.lr > 0.0))
    throw ArgumentError("adadelta: lr must be positive, got " + std::to_string(params.lr));
}

void AdaDelta::step(Matrix& param, const Matrix& grad) {
  if (!param.same_shape(acc_grad_) || !grad.same_shape(acc_grad_)) {
    throw ShapeError("adadelta: state " + acc_grad_.shape_string() + ", param " +
                     param.shape_string() + ", grad " + grad.shape_string());
  }
  const double rho = params_.rho;
  const double eps = params_.eps;
  auto p = param.values();
  auto g = grad.values();
  auto eg = acc_grad_.values();
  auto ex = acc_update_.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    eg[i] = rho * eg[i] + (1.0 - rho) * g[i] * g[i];
    const double dx = -params_.lr * std::sqrt(ex[i] + eps) / std::sqrt(eg[i] + eps) * g[i];
    ex[i] = rho * ex[i] + (1.0 - rho) * dx * dx;
    p[i] += dx;
  }
}

}  // namespace acmvl
