#include <cmath>

#include "acmvl/error.hpp"
#include "acmvl/matrix.hpp"
#include "acmvl/ops.hpp"
#include "acmvl/rng.hpp"
#include "doctest.h"
#include "support/finite_diff.hpp"

using namespace acmvl;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("matmul basics") {
  const Matrix a{{1, 2}, {3, 4}};
  CHECK(matmul(Matrix::identity(2), a) == a);
  CHECK(matmul(Matrix{{1, 2}}, Matrix{{3}, {4}}) == Matrix{{11}});
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
}

TEST_CASE("transposed products agree with explicit transpose") {
  Rng rng(RngSeed{3});
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(4, 5, rng);
  const Matrix c = random_matrix(2, 3, rng);
  CHECK(max_abs_diff(matmul_tn(a, b), matmul(transpose(a), b)) < 1e-14);
  CHECK(max_abs_diff(matmul_nt(a, c), matmul(a, transpose(c))) < 1e-14);
  CHECK_THROWS_AS(matmul_tn(a, c), ShapeError);
  CHECK_THROWS_AS(matmul_nt(a, b), ShapeError);
}

TEST_CASE("matmul is associative on random matrices") {
  Rng rng(RngSeed{11});
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = 1 + rng.below(5), m = 1 + rng.below(5), p = 1 + rng.below(5), q = 1 + rng.below(5);
    const Matrix a = random_matrix(n, m, rng), b = random_matrix(m, p, rng), c = random_matrix(p, q, rng);
    CHECK(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) < 1e-9);
  }
}

TEST_CASE("rng is reproducible and derived seeds differ") {
  Rng a(RngSeed{42}), b(RngSeed{42});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(derive_seed(RngSeed{1}, 0) != derive_seed(RngSeed{1}, 1));
  CHECK(derive_seed(RngSeed{1}, 0) == derive_seed(RngSeed{1}, 0));
  Rng r(RngSeed{5});
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("xavier_init bounds and determinism") {
  const Matrix w = xavier_init(256, 64, RngSeed{9});
  CHECK(w.rows() == 256);
  CHECK(w.cols() == 64);
  const double limit = 0.13693063937629152;  // sqrt(6/320)
  CHECK(xavier_limit(256, 64) == doctest::Approx(limit).epsilon(1e-15));
  for (double v : w.values()) CHECK(std::abs(v) <= limit);

  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix one = xavier_init(1, 1, RngSeed{s});
    CHECK(std::abs(one(0, 0)) <= 1.7320508075688772);
  }
  CHECK(xavier_init(5, 7, RngSeed{1}) == xavier_init(5, 7, RngSeed{1}));
  CHECK_THROWS_AS(xavier_init(0, 3, RngSeed{1}), ArgumentError);
  CHECK_THROWS_AS(xavier_init(3, 0, RngSeed{1}), ArgumentError);
}

TEST_CASE("xavier_init moments") {
  const Matrix w = xavier_init(400, 250, RngSeed{2024});  // 1e5 draws
  const double limit = xavier_limit(400, 250);
  double mean = 0.0;
  for (double v : w.values()) mean += v;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double v : w.values()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.size());
  const double expected_var = limit * limit / 3.0;
  CHECK(std::abs(mean) < 0.1 * std::sqrt(expected_var));
  CHECK(std::abs(var - expected_var) < 0.1 * expected_var);
}

TEST_CASE("relu and its mask") {
  const Matrix x{{-1, 0, 2}};
  CHECK(relu(x) == Matrix{{0, 0, 2}});
  CHECK(relu_mask(x) == Matrix{{0, 0, 1}});
  const Matrix pos{{0.5, 3, 7}};
  CHECK(relu(pos) == pos);
}

TEST_CASE("softmax_rows") {
  const Matrix s = softmax_rows(Matrix{{0, 0}, {std::log(2.0), 0}, {1000, 0}});
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(0, 1) == doctest::Approx(0.5));
  CHECK(s(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(s(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(s(2, 0) == doctest::Approx(1.0));
  CHECK(s(2, 1) < 1e-300);
  CHECK(all_finite(s));

  Rng rng(RngSeed{8});
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix p = softmax_rows(random_matrix(4, 5, rng, -50, 50));
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double total = 0.0;
      for (double v : p.row(r)) {
        CHECK(v > 0.0 - 0.0);
        CHECK(v <= 1.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("recon_loss values and gradient") {
  const Matrix x{{1, 0}};
  CHECK(recon_loss(x, x) == 0.0);
  CHECK(recon_loss(x, Matrix{{0, 0}}) == doctest::Approx(0.5));
  CHECK(recon_loss_grad(x, x).grad == Matrix(1, 2));
  CHECK_THROWS_AS(recon_loss(x, Matrix(2, 1)), ShapeError);

  Rng rng(RngSeed{4});
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix target = random_matrix(3, 4, rng);
    Matrix xhat = random_matrix(3, 4, rng);
    CHECK(recon_loss(target, xhat) > 0.0);
    const Matrix analytic = recon_loss_grad(target, xhat).grad;
    const Matrix numeric = testing::numeric_gradient(xhat, [&] { return recon_loss(target, xhat); });
    CHECK(testing::max_relative_error(analytic, numeric) <= 1e-4);
  }
}

TEST_CASE("ce_loss values and logit gradient") {
  CHECK(ce_loss(Matrix{{1, 0, 0}}, Matrix{{1, 0, 0}}) <= 1e-11);
  // -log(0.25 + 1e-12), the clamp shifts ln 4 by about 4e-12
  CHECK(ce_loss(Matrix{{0.25, 0.25, 0.25, 0.25}}, Matrix{{0, 1, 0, 0}}) ==
        doctest::Approx(1.3862943611158906).epsilon(1e-14));
  const auto g = ce_loss_grad(Matrix{{0.5, 0.5}}, Matrix{{1, 0}});
  CHECK(g.grad == Matrix{{-0.5, 0.5}});
  CHECK_THROWS_AS(ce_loss(Matrix(1, 2), Matrix(1, 3)), ShapeError);

  Rng rng(RngSeed{6});
  for (int trial = 0; trial < 10; ++trial) {
    Matrix logits = random_matrix(3, 4, rng, -2, 2);
    Matrix y(3, 4);
    for (std::size_t r = 0; r < 3; ++r) y(r, rng.below(4)) = 1.0;
    const Matrix analytic = ce_loss_grad(softmax_rows(logits), y).grad;
    CHECK(ce_loss(softmax_rows(logits), y) >= 0.0);
    const Matrix numeric =
        testing::numeric_gradient(logits, [&] { return ce_loss(softmax_rows(logits), y); });
    CHECK(testing::max_relative_error(analytic, numeric) <= 1e-4);
  }
}
