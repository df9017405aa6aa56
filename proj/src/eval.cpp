#include "acmvl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>

#include "acmvl/error.hpp"
#include "acmvl/ops.hpp"

namespace acmvl {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch " + std::to_string(a) + " vs " +
                     std::to_string(b));
  }
}

struct Contingency {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> left;
  std::map<int, double> right;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  Contingency c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.joint[{a[i], b[i]}] += 1.0;
    c.left[a[i]] += 1.0;
    c.right[b[i]] += 1.0;
  }
  return c;
}

double entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, count] : counts) {
    const double p = count / n;
    h -= p * std::log(p);
  }
  return h;
}

double pairs(double n) { return n * (n - 1.0) / 2.0; }

double log_sum_exp(std::span<const double> v) {
  const double peak = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - peak);
  return peak + std::log(acc);
}

// Per-sample log(w_j N(x_i | mu_j, var_j)).
Matrix component_log_density(const GmmModel& m, const Matrix& x) {
  const std::size_t d = x.cols();
  Matrix out(x.rows(), m.k);
  for (std::size_t j = 0; j < m.k; ++j) {
    double log_norm = 0.0;
    for (std::size_t c = 0; c < d; ++c) log_norm += std::log(2.0 * std::numbers::pi * m.variances(j, c));
    const double log_w = m.weights[j] > 0.0 ? std::log(m.weights[j])
                                            : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double quad = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x(i, c) - m.means(j, c);
        quad += diff * diff / m.variances(j, c);
      }
      out(i, j) = log_w - 0.5 * (log_norm + quad);
    }
  }
  return out;
}

// E-step: responsibilities in place of log densities; returns total log-likelihood.
double expectation(const GmmModel& m, const Matrix& x, Matrix& resp) {
  resp = component_log_density(m, x);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = resp.row(i);
    const double lse = log_sum_exp(row);
    total += lse;
    for (auto& v : row) v = std::exp(v - lse);
  }
  return total;
}

void maximization(GmmModel& m, const Matrix& x, const Matrix& resp) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  for (std::size_t j = 0; j < m.k; ++j) {
    double nk = 0.0;
    for (std::size_t i = 0; i < n; ++i) nk += resp(i, j);
    m.weights[j] = nk / static_cast<double>(n);
    // A component that lost all its mass keeps its parameters.
    if (nk <= std::numeric_limits<double>::min()) continue;
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += resp(i, j) * x(i, c);
      mean /= nk;
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = x(i, c) - mean;
        var += resp(i, j) * diff * diff;
      }
      m.means(j, c) = mean;
      m.variances(j, c) = std::max(var / nk, kGmmVarianceFloor);
    }
  }
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

Matrix kmeans_pp(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centres(k, x.cols());
  auto take = [&](std::size_t j, std::size_t i) {
    std::copy(x.row(i).begin(), x.row(i).end(), centres.row(j).begin());
  };
  take(0, static_cast<std::size_t>(rng.below(n)));
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], sq_dist(x.row(i), centres.row(j - 1)));
      total += dist[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = rng.uniform01() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= dist[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    take(j, pick);
  }
  return centres;
}

}  // namespace

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  require_same_length(pred.size(), truth.size(), "accuracy");
  if (pred.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double macro_f1(std::span<const int> pred, std::span<const int> truth) {
  require_same_length(pred.size(), truth.size(), "macro_f1");
  std::set<int> classes(pred.begin(), pred.end());
  classes.insert(truth.begin(), truth.end());
  if (classes.empty()) return 0.0;
  double sum = 0.0;
  for (int c : classes) {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == c && truth[i] == c) tp += 1.0;
      else if (pred[i] == c) fp += 1.0;
      else if (truth[i] == c) fn += 1.0;
    }
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

double nmi(std::span<const int> a, std::span<const int> b) {
  require_same_length(a.size(), b.size(), "nmi");
  if (a.empty()) return 0.0;
  const double n = static_cast<double>(a.size());
  const Contingency c = contingency(a, b);
  const double ha = entropy(c.left, n);
  const double hb = entropy(c.right, n);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  double mi = 0.0;
  for (const auto& [key, count] : c.joint) {
    const double pij = count / n;
    mi += pij * std::log(count * n / (c.left.at(key.first) * c.right.at(key.second)));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double jaccard(std::span<const int> a, std::span<const int> b) {
  require_same_length(a.size(), b.size(), "jaccard");
  const Contingency c = contingency(a, b);
  double both = 0.0;
  double in_a = 0.0;
  double in_b = 0.0;
  for (const auto& [key, count] : c.joint) both += pairs(count);
  for (const auto& [label, count] : c.left) in_a += pairs(count);
  for (const auto& [label, count] : c.right) in_b += pairs(count);
  const double either = in_a + in_b - both;
  return either > 0.0 ? both / either : 1.0;
}

LogRegModel train_logreg(const Matrix& x, std::span<const int> labels, std::size_t class_count,
                         const LogRegOptions& options) {
  require_same_length(x.rows(), labels.size(), "train_logreg");
  if (std::set<int>(labels.begin(), labels.end()).size() < 2)
    throw ArgumentError("train_logreg: at least two classes must be present");
  if (!(options.lr > 0.0)) throw ArgumentError("train_logreg: lr must be positive");
  const Matrix y = [&] {
    Matrix out(labels.size(), class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count)
        throw ArgumentError("train_logreg: label " + std::to_string(labels[i]) + " out of range");
      out(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return out;
  }();

  LogRegModel m{Matrix(x.cols(), class_count), std::vector<double>(class_count, 0.0)};
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (std::size_t it = 0; it < options.iters; ++it) {
    Matrix delta = predict_proba_logreg(m, x) - y;
    Matrix grad_w = matmul_tn(x, delta);
    grad_w *= inv_n;
    for (std::size_t k = 0; k < class_count; ++k) {
      double gb = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) gb += delta(i, k);
      m.bias[k] -= options.lr * gb * inv_n;
    }
    grad_w *= options.lr;
    m.weight -= grad_w;
  }
  return m;
}

Matrix predict_proba_logreg(const LogRegModel& m, const Matrix& x) {
  if (x.cols() != m.weight.rows()) {
    throw ShapeError("logreg: model expects " + std::to_string(m.weight.rows()) +
                     " features, got " + std::to_string(x.cols()));
  }
  Matrix logits = matmul(x, m.weight);
  for (std::size_t i = 0; i < logits.rows(); ++i)
    for (std::size_t k = 0; k < logits.cols(); ++k) logits(i, k) += m.bias[k];
  return softmax_rows(logits);
}

std::vector<int> predict_logreg(const LogRegModel& m, const Matrix& x) {
  const Matrix p = predict_proba_logreg(m, x);
  std::vector<int> out(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = p.row(i);
    // max_element returns the first maximum, so ties resolve to the lowest id.
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

GmmFit fit_gmm(const Matrix& x, std::size_t k, RngSeed seed, const GmmOptions& options) {
  if (k == 0) throw ArgumentError("fit_gmm: k must be >= 1");
  if (x.rows() < k) {
    throw ArgumentError("fit_gmm: " + std::to_string(x.rows()) + " samples for " +
                        std::to_string(k) + " components");
  }
  if (x.cols() == 0) throw ArgumentError("fit_gmm: data has no features");

  Rng rng(seed);
  GmmFit fit;
  GmmModel& m = fit.model;
  m.k = k;
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  m.means = kmeans_pp(x, k, rng);
  m.variances = Matrix(k, x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, c);
    mean /= static_cast<double>(x.rows());
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, c) - mean) * (x(i, c) - mean);
    var = std::max(var / static_cast<double>(x.rows()), kGmmVarianceFloor);
    for (std::size_t j = 0; j < k; ++j) m.variances(j, c) = var;
  }

  Matrix resp;
  double previous = expectation(m, x, resp);
  fit.log_likelihood.push_back(previous);
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    maximization(m, x, resp);
    const double current = expectation(m, x, resp);
    fit.log_likelihood.push_back(current);
    if (current - previous < options.tol) break;
    previous = current;
  }
  return fit;
}

std::vector<int> predict_gmm(const GmmModel& m, const Matrix& x) {
  if (x.cols() != m.means.cols()) {
    throw ShapeError("gmm: model expects " + std::to_string(m.means.cols()) + " features, got " +
                     std::to_string(x.cols()));
  }
  const Matrix logp = component_log_density(m, x);
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = logp.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double gmm_log_likelihood(const GmmModel& m, const Matrix& x) {
  Matrix resp;
  return expectation(m, x, resp);
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  s.mean.assign(x.cols(), 0.0);
  s.scale.assign(x.cols(), 1.0);
  if (x.rows() == 0) return s;
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, c) - mean) * (x(i, c) - mean);
    const double sd = std::sqrt(var / n);
    s.mean[c] = mean;
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) {
    throw ShapeError("standardize: fitted on " + std::to_string(mean.size()) + " columns, got " +
                     std::to_string(x.cols()));
  }
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t c = 0; c < out.cols(); ++c) out(i, c) = (out(i, c) - mean[c]) / scale[c];
  return out;
}

}  // namespace acmvl
