#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "acmvl/matrix.hpp"
#include "acmvl/rng.hpp"

namespace acmvl {

// --- metrics -------------------------------------------------------------

double accuracy(std::span<const int> pred, std::span<const int> truth);
/// Unweighted mean of per-class F1 over every class id that occurs in either
/// argument. A class with an empty precision or recall denominator scores 0.
double macro_f1(std::span<const int> pred, std::span<const int> truth);
/// I(a; b) / sqrt(H(a) H(b)) in nats; 0 when either entropy is 0.
double nmi(std::span<const int> a, std::span<const int> b);
/// Pair-counting Jaccard index |S_a & S_b| / |S_a | S_b| where S_x is the set
/// of unordered sample pairs placed in one cluster by x. 1 when both sets are
/// empty (neither partition groups any pair).
double jaccard(std::span<const int> a, std::span<const int> b);

// --- logistic regression -------------------------------------------------

struct LogRegModel {
  Matrix weight;  // features x K
  std::vector<double> bias;
};

struct LogRegOptions {
  std::size_t iters = 500;
  double lr = 0.5;
};

/// Multinomial logistic regression fit by full-batch gradient descent on the
/// mean negative log-likelihood, starting from zero weights.
LogRegModel train_logreg(const Matrix& x, std::span<const int> labels, std::size_t class_count,
                         const LogRegOptions& options = {});
Matrix predict_proba_logreg(const LogRegModel& m, const Matrix& x);
/// Argmax of the class scores; ties go to the lowest class id.
std::vector<int> predict_logreg(const LogRegModel& m, const Matrix& x);

// --- Gaussian mixture ----------------------------------------------------

inline constexpr double kGmmVarianceFloor = 1e-6;

struct GmmModel {
  std::size_t k = 0;
  std::vector<double> weights;
  Matrix means;      // k x d
  Matrix variances;  // k x d, diagonal covariances, each >= kGmmVarianceFloor
};

struct GmmOptions {
  std::size_t max_iters = 200;
  double tol = 1e-8;
};

struct GmmFit {
  GmmModel model;
  /// Total log-likelihood after initialization and after every EM iteration.
  std::vector<double> log_likelihood;
};

/// Diagonal-covariance EM with k-means++ seeding of the means. Stops when
/// the log-likelihood gain drops below tol or after max_iters iterations.
GmmFit fit_gmm(const Matrix& x, std::size_t k, RngSeed seed, const GmmOptions& options = {});
std::vector<int> predict_gmm(const GmmModel& m, const Matrix& x);
double gmm_log_likelihood(const GmmModel& m, const Matrix& x);

// --- feature standardization ---------------------------------------------

/// Per-column z-scoring fitted on one matrix and applied to others.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

}  // namespace acmvl
