#include "otdcov/dcov.hpp"

#include <cmath>
#include <doctest.h>
#include <numbers>

#include "otdcov/geometry.hpp"
#include "otdcov/rng.hpp"
#include "support/oracles.hpp"

using namespace otdcov;

namespace {
Sample random_sample(int n, int d, Rng& rng) {
  Sample s(n);
  for (Vector& p : s) p = rng.normal_vector(d);
  return s;
}
}  // namespace

TEST_CASE("pairwise distances: basic shapes and values") {
  CHECK(pairwise_distances({{1.5}}, Metric::kEuclidean)(0, 0) == 0.0);

  const Matrix m = pairwise_distances({{0.0}, {3.0}, {4.0}}, Metric::kEuclidean);
  const double expected[3][3] = {{0, 3, 4}, {3, 0, 1}, {4, 1, 0}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(m(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-15));
  }

  const Matrix g = pairwise_distances({{1.0, 0.0}, {0.0, 1.0}}, Metric::kGeodesic);
  CHECK(g(0, 1) == doctest::Approx(std::numbers::pi / 2));
  CHECK(g(1, 0) == g(0, 1));
  CHECK(g(0, 0) == 0.0);

  CHECK_THROWS_AS(pairwise_distances({{1.0}, {1.0, 2.0}}, Metric::kEuclidean),
                  std::invalid_argument);
  CHECK_THROWS_AS(pairwise_distances({{0.5, 0.0}}, Metric::kGeodesic), std::invalid_argument);
}

TEST_CASE("double centering: zero matrix, 2x2 closed form, vanishing sums") {
  const DoubleCenteredMatrix zero(Matrix(3, 3, 0.0));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(zero(i, j) == 0.0);
  }

  const double d = 2.7;
  Matrix pair(2, 2, 0.0);
  pair(0, 1) = d;
  pair(1, 0) = d;
  const DoubleCenteredMatrix a(pair);
  CHECK(a(0, 0) == doctest::Approx(-d / 2).epsilon(1e-15));
  CHECK(a(0, 1) == doctest::Approx(d / 2).epsilon(1e-15));
  CHECK(a(1, 0) == doctest::Approx(d / 2).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(-d / 2).epsilon(1e-15));

  Rng rng(31);
  const Matrix dist = pairwise_distances(random_sample(10, 3, rng), Metric::kEuclidean);
  const DoubleCenteredMatrix c(dist);
  double maxentry = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) maxentry = std::max(maxentry, std::abs(c(i, j)));
  }
  for (int i = 0; i < 10; ++i) {
    double rowsum = 0.0, colsum = 0.0;
    for (int j = 0; j < 10; ++j) {
      rowsum += c(i, j);
      colsum += c(j, i);
    }
    CHECK(std::abs(rowsum) <= 1e-9 * 10 * maxentry);
    CHECK(std::abs(colsum) <= 1e-9 * 10 * maxentry);
  }
}

TEST_CASE("double centering rejects bad input") {
  CHECK_THROWS_AS(double_center(Matrix(2, 3, 0.0)), std::invalid_argument);
  Matrix asym(2, 2, 0.0);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(double_center(asym), std::invalid_argument);
  Matrix diag(2, 2, 0.0);
  diag(0, 0) = 0.5;
  CHECK_THROWS_AS(double_center(diag), std::invalid_argument);
}

TEST_CASE("dcov_sq: constant margin, n=2 closed form, brute-force oracle") {
  const Sample constant{{1.0}, {1.0}, {1.0}, {1.0}};
  Rng rng(37);
  const Sample other = random_sample(4, 1, rng);
  const DoubleCenteredMatrix ac(pairwise_distances(constant, Metric::kEuclidean));
  const DoubleCenteredMatrix bo(pairwise_distances(other, Metric::kEuclidean));
  CHECK(dcov_sq(ac, bo) == 0.0);

  const DoubleCenteredMatrix ax(pairwise_distances({{0.0}, {2.0}}, Metric::kEuclidean));
  const DoubleCenteredMatrix ay(pairwise_distances({{0.0}, {4.0}}, Metric::kEuclidean));
  CHECK(dcov_sq(ax, ay) == doctest::Approx(2.0).epsilon(1e-15));  // d_x d_y / 4

  for (int rep = 0; rep < 20; ++rep) {
    const int n = 8;
    const Sample x = random_sample(n, 2, rng);
    const Sample y = random_sample(n, 3, rng);
    const DoubleCenteredMatrix a(pairwise_distances(x, Metric::kEuclidean));
    const DoubleCenteredMatrix b(pairwise_distances(y, Metric::kEuclidean));
    CHECK(dcov_sq(a, b) == doctest::Approx(testing::dcov_sq_direct(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("dcov_sq symmetry and relabeling invariance") {
  Rng rng(41);
  const int n = 12;
  const Sample x = random_sample(n, 2, rng);
  const Sample y = random_sample(n, 2, rng);
  const DoubleCenteredMatrix a(pairwise_distances(x, Metric::kEuclidean));
  const DoubleCenteredMatrix b(pairwise_distances(y, Metric::kEuclidean));
  CHECK(dcov_sq(a, b) == dcov_sq(b, a));

  const std::vector<int> relabel = rng.permutation(n);
  Sample xp(n), yp(n);
  for (int i = 0; i < n; ++i) {
    xp[i] = x[relabel[i]];
    yp[i] = y[relabel[i]];
  }
  const DoubleCenteredMatrix ap(pairwise_distances(xp, Metric::kEuclidean));
  const DoubleCenteredMatrix bp(pairwise_distances(yp, Metric::kEuclidean));
  CHECK(dcov_sq(ap, bp) == doctest::Approx(dcov_sq(a, b)).epsilon(1e-12));
}

TEST_CASE("dcov_sq: orthogonal invariance and scaling on one margin") {
  Rng rng(43);
  const int n = 10;
  const Sample x = random_sample(n, 3, rng);
  const Sample y = random_sample(n, 3, rng);
  const DoubleCenteredMatrix a(pairwise_distances(x, Metric::kEuclidean));
  const DoubleCenteredMatrix b(pairwise_distances(y, Metric::kEuclidean));
  const double base = dcov_sq(a, b);

  const Rotation rot(UnitDirection(rng.normal_vector(3)), UnitDirection(rng.normal_vector(3)));
  Sample xr(n);
  const Vector shift = rng.normal_vector(3);
  for (int i = 0; i < n; ++i) {
    xr[i] = rot.apply(x[i]);
    for (int k = 0; k < 3; ++k) xr[i][k] += shift[k];
  }
  const DoubleCenteredMatrix ar(pairwise_distances(xr, Metric::kEuclidean));
  CHECK(dcov_sq(ar, b) == doctest::Approx(base).epsilon(1e-9));

  const double lambda = 3.25;
  Sample xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = x[i];
    for (double& c : xs[i]) c *= lambda;
  }
  const DoubleCenteredMatrix as(pairwise_distances(xs, Metric::kEuclidean));
  CHECK(dcov_sq(as, b) == doctest::Approx(lambda * base).epsilon(1e-9));
}

TEST_CASE("dcor_sq: self-correlation, degenerate margins, range") {
  Rng rng(47);
  const Sample x = random_sample(9, 2, rng);
  const DoubleCenteredMatrix a(pairwise_distances(x, Metric::kEuclidean));
  CHECK(dcor_sq(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  const Sample constant{{2.0, 2.0}, {2.0, 2.0}, {2.0, 2.0}};
  const DoubleCenteredMatrix c(pairwise_distances(constant, Metric::kEuclidean));
  const DoubleCenteredMatrix b(pairwise_distances(random_sample(3, 2, rng), Metric::kEuclidean));
  CHECK(dcor_sq(c, b) == 0.0);

  for (int rep = 0; rep < 100; ++rep) {
    const int n = 4 + static_cast<int>(rng.below(8));
    const DoubleCenteredMatrix u(pairwise_distances(random_sample(n, 2, rng), Metric::kEuclidean));
    const DoubleCenteredMatrix v(pairwise_distances(random_sample(n, 3, rng), Metric::kEuclidean));
    const double r = dcor_sq(u, v);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }

  CHECK_THROWS_AS(dcov_sq(a, c), std::invalid_argument);
}
