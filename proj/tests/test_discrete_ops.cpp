#include "doctest.h"
#include "support.hpp"

#include "rxinv/discrete_ops.hpp"

using namespace rxtest;

namespace {

double weighted_inner(const SpatialField& a, const SpatialField& b) {
  double s = 0.0;
  for (int i = 1; i + 1 < a.grid.size(); ++i) s += a.grid.h() * a[i] * b[i];
  return s;
}

SpatialField random_interior(const SpaceGrid& xs, std::mt19937_64& rng) {
  SpatialField f(xs);
  fill_interior(f, rng);
  return f;
}

}  // namespace

TEST_CASE("Laplacian of quadratics, zero and sin(pi x)") {
  const SpaceGrid xs(101, 0.0, 1.0);
  const DirichletLaplacian lap(xs);
  const auto q = lap.apply(SpatialField::from_function(xs, [](double x) { return x * (1.0 - x); }));
  for (int i = 1; i < 100; ++i) CHECK(q[i] == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(q[0] == 0.0);
  CHECK(q[100] == 0.0);

  CHECK(lap.apply(SpatialField(xs)).values.norm() == 0.0);

  const auto s = SpatialField::from_function(xs, [](double x) { return std::sin(kPi * x); });
  const auto ls = lap.apply(s);
  double worst = 0.0;
  for (int i = 1; i < 100; ++i) worst = std::max(worst, std::abs(ls[i] + kPi * kPi * s[i]));
  CHECK(worst < 1e-2);
}

TEST_CASE("Laplacian solve recovers quadratics and round-trips") {
  const SpaceGrid xs(101, 0.0, 1.0);
  const DirichletLaplacian lap(xs);
  const auto z = lap.solve(constant_field(xs, -2.0));
  for (int i = 0; i < 101; ++i) CHECK(z[i] == doctest::Approx(xs.node(i) * (1.0 - xs.node(i))).epsilon(1e-12));
  CHECK(lap.solve(SpatialField(xs)).values.norm() == 0.0);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const SpatialField r = random_interior(xs, rng);
    CHECK((lap.apply(lap.solve(r)).values - r.values).norm() <= 1e-12 * r.values.norm());
    CHECK((lap.solve(lap.apply(r)).values - r.values).norm() <= 1e-10 * r.values.norm());
  }
}

TEST_CASE("Laplacian is self-adjoint under the h-weighted interior product") {
  std::mt19937_64 rng(5);
  const SpaceGrid xs(64, -0.5, 2.0);
  const DirichletLaplacian lap(xs);
  for (int trial = 0; trial < 20; ++trial) {
    const SpatialField g = random_interior(xs, rng), w = random_interior(xs, rng);
    const double lhs = weighted_inner(lap.apply(g), w);
    const double rhs = weighted_inner(g, lap.apply(w));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));
  }
}

TEST_CASE("bi-Laplacian solve inverts the twice-applied Laplacian") {
  const SpaceGrid xs(101, 0.0, 1.0);
  const DirichletLaplacian lap(xs);
  const DirichletBiLaplacian bi(xs);
  CHECK(bi.solve(SpatialField(xs)).values.norm() == 0.0);

  for (int k = 1; k <= 4; ++k) {
    const auto g = SpatialField::from_function(xs, [k](double x) { return std::sin(k * kPi * x) + x * x * (1 - x); });
    const auto back = bi.solve(lap.apply(lap.apply(g)));
    for (int i = 1; i < 100; ++i) CHECK(back[i] == doctest::Approx(g[i]).epsilon(1e-10).scale(1.0));
  }

  // Reflection about x = 1/2 commutes with the operator.
  const auto rhs = SpatialField::from_function(xs, [](double x) { return std::cos(3.0 * kPi * (x - 0.5)) + x * (1 - x); });
  const auto z = bi.solve(rhs);
  for (int i = 0; i < 101; ++i) CHECK(z[i] == doctest::Approx(z[100 - i]).epsilon(1e-10));
}

TEST_CASE("time derivative of t, constants and t^2") {
  const SpaceGrid xs(5, 0.0, 1.0);
  const TimeGrid ts(11, 1.0);
  const auto d1 = time_derivative(SpaceTimeField::from_function(ts, xs, [](double t, double) { return t; }));
  const auto d0 = time_derivative(SpaceTimeField::from_function(ts, xs, [](double, double) { return 3.0; }));
  const auto d2 = time_derivative(SpaceTimeField::from_function(ts, xs, [](double t, double) { return t * t; }));
  for (int n = 1; n < ts.size(); ++n)
    for (int i = 0; i < xs.size(); ++i) {
      CHECK(d1.values(n, i) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(d0.values(n, i) == 0.0);
      CHECK(d2.values(n, i) == doctest::Approx(ts.node(n) + ts.node(n - 1)).epsilon(1e-12));
    }
}

TEST_CASE("banded LU agrees with a dense solve") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  const int n = 40, p = 2;
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - p); j <= std::min(n - 1, i + p); ++j) dense(i, j) = g(rng);
  for (int i = 0; i < n; ++i) dense(i, i) = 10.0 + std::abs(g(rng));
  const BandedLU lu(n, p, [&](int i, int j) { return dense(i, j); });
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = g(rng);
  Eigen::VectorXd x = b;
  lu.solve_in_place(std::span<double>(x.data(), n));
  const Eigen::VectorXd ref = dense.partialPivLu().solve(b);
  CHECK((x - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("sine basis diagonalizes the Dirichlet Laplacian") {
  const SpaceGrid xs(41, 0.0, 1.0);
  const SineBasis basis(xs);
  const DirichletLaplacian lap(xs);
  const int m = basis.size();
  REQUIRE(m == 39);

  // The transform is an involution.
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  RowMatrix v(3, m);
  for (int r = 0; r < 3; ++r)
    for (int i = 0; i < m; ++i) v(r, i) = g(rng);
  CHECK((basis.transform(basis.transform(v)) - v).norm() <= 1e-12 * v.norm());

  // Columns are eigenvectors with the closed-form eigenvalues.
  const RowMatrix eye = RowMatrix::Identity(m, m);
  const RowMatrix cols = basis.transform(eye);
  for (int k = 0; k < m; ++k) {
    SpatialField e(xs);
    for (int i = 0; i < m; ++i) e[i + 1] = cols(i, k);
    const auto le = lap.apply(e);
    const double lambda = basis.eigenvalues()[k];
    const double closed = 4.0 * std::pow(std::sin(kPi * (k + 1) / (2.0 * (m + 1))), 2) / (xs.h() * xs.h());
    CHECK(lambda == doctest::Approx(closed).epsilon(1e-12));
    for (int i = 1; i + 1 < xs.size(); ++i) CHECK(le[i] == doctest::Approx(-lambda * e[i]).epsilon(1e-9).scale(lambda));
  }
}
