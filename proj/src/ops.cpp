#include "acmvl/ops.hpp"

#include <algorithm>
#include <cmath>

#include "acmvl/error.hpp"

namespace acmvl {

double xavier_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, RngSeed seed) {
  if (fan_in == 0 || fan_out == 0) {
    throw ArgumentError("xavier_init: fan_in and fan_out must be >= 1 (got " +
                        std::to_string(fan_in) + ", " + std::to_string(fan_out) + ")");
  }
  const double limit = xavier_limit(fan_in, fan_out);
  Rng rng(seed);
  Matrix w(fan_in, fan_out);
  for (auto& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

Matrix relu(Matrix x) {
  for (auto& v : x.values()) v = v > 0.0 ? v : 0.0;
  return x;
}

Matrix relu_mask(const Matrix& x) {
  Matrix m(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) m.values()[i] = x.values()[i] > 0.0 ? 1.0 : 0.0;
  return m;
}

Matrix softmax_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto dst = out.row(r);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - peak);
      total += dst[c];
    }
    for (auto& v : dst) v /= total;
  }
  return out;
}

double recon_loss(const Matrix& x, const Matrix& xhat) {
  if (!x.same_shape(xhat)) {
    throw ShapeError("recon_loss: input " + x.shape_string() + " vs reconstruction " +
                     xhat.shape_string());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = xhat.values()[i] - x.values()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

LossAndGrad recon_loss_grad(const Matrix& x, const Matrix& xhat) {
  LossAndGrad out{recon_loss(x, xhat), xhat - x};
  out.grad *= 2.0 / static_cast<double>(x.size());
  return out;
}

double ce_loss(const Matrix& yhat, const Matrix& y_onehot) {
  if (!yhat.same_shape(y_onehot)) {
    throw ShapeError("ce_loss: prediction " + yhat.shape_string() + " vs labels " +
                     y_onehot.shape_string());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const double y = y_onehot.values()[i];
    if (y != 0.0) acc -= y * std::log(yhat.values()[i] + kLogClamp);
  }
  return acc / static_cast<double>(yhat.rows());
}

LossAndGrad ce_loss_grad(const Matrix& yhat, const Matrix& y_onehot) {
  LossAndGrad out{ce_loss(yhat, y_onehot), yhat - y_onehot};
  out.grad *= 1.0 / static_cast<double>(yhat.rows());
  return out;
}

}  // namespace acmvl
