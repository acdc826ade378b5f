#include "doctest.h"
#include "support.hpp"

#include "rxinv/errors.hpp"
#include "rxinv/grid.hpp"

using namespace rxtest;

TEST_CASE("grids place nodes uniformly and reject degenerate sizes") {
  const SpaceGrid xs(101, 0.0, 1.0);
  CHECK(xs.h() == doctest::Approx(0.01));
  CHECK(xs.node(100) == doctest::Approx(1.0));
  CHECK(xs.interior_size() == 99);
  const TimeGrid ts(51, 0.1);
  CHECK(ts.dt() == doctest::Approx(0.002));
  CHECK(ts.node(50) == doctest::Approx(0.1));

  CHECK_THROWS_AS(SpaceGrid(2, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(SpaceGrid(5, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(TimeGrid(1, 0.1), ConfigError);
  CHECK_THROWS_AS(TimeGrid(5, 0.0), ConfigError);
}

TEST_CASE("fields reject shapes that do not match their grids") {
  const SpaceGrid xs(11, 0.0, 1.0);
  const TimeGrid ts(5, 0.1);
  CHECK_THROWS_AS(SpatialField(xs, Eigen::VectorXd::Zero(10)), StructuralError);
  CHECK_THROWS_AS(SpaceTimeField(ts, xs, RowMatrix::Zero(5, 10)), StructuralError);
  const SpaceTimeField a(ts, xs);
  const SpaceTimeField b(TimeGrid(6, 0.1), xs);
  CHECK_THROWS_AS(require_same_shape(a, b), StructuralError);
}

TEST_CASE("trapezoid time integral on constants, linear and quadratic integrands") {
  const SpaceGrid xs(11, 0.0, 1.0);
  const TimeGrid ts(51, 0.1);

  const auto one = trapezoid_time_integral(SpaceTimeField::from_function(ts, xs, [](double, double) { return 1.0; }));
  for (int i = 0; i < xs.size(); ++i) CHECK(one[i] == doctest::Approx(0.1).epsilon(1e-14));

  const auto lin = trapezoid_time_integral(SpaceTimeField::from_function(ts, xs, [](double t, double) { return t; }));
  for (int i = 0; i < xs.size(); ++i) CHECK(lin[i] == doctest::Approx(0.005).epsilon(1e-13));

  // Composite rule error for t^2 is T dt^2 / 12 * max|f''| = 0.1 * 4e-6 / 6.
  const auto quad =
      trapezoid_time_integral(SpaceTimeField::from_function(ts, xs, [](double t, double) { return t * t; }));
  const double bound = 0.1 * ts.dt() * ts.dt() / 6.0;
  for (int i = 0; i < xs.size(); ++i) {
    CHECK(std::abs(quad[i] - 1e-3 / 3.0) <= bound * (1.0 + 1e-9));
    CHECK(quad[i] > 1e-3 / 3.0);
  }
}

TEST_CASE("trapezoid time integral is linear and exact on affine-in-t fields") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const SpaceGrid xs(21, 0.0, 1.0);
  const TimeGrid ts(31, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    SpaceTimeField f(ts, xs), h(ts, xs);
    fill_interior(f, rng);
    fill_interior(h, rng);
    const double alpha = g(rng), beta = g(rng);
    const SpatialField lhs = trapezoid_time_integral(SpaceTimeField(ts, xs, alpha * f.values + beta * h.values));
    const Eigen::VectorXd rhs =
        alpha * trapezoid_time_integral(f).values + beta * trapezoid_time_integral(h).values;
    CHECK((lhs.values - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));

    Eigen::VectorXd c0(xs.size()), c1(xs.size());
    for (int i = 0; i < xs.size(); ++i) c0[i] = g(rng), c1[i] = g(rng);
    SpaceTimeField affine(ts, xs);
    for (int n = 0; n < ts.size(); ++n) affine.values.row(n) = (c0 + ts.node(n) * c1).transpose();
    const Eigen::VectorXd exact = 0.3 * c0 + 0.045 * c1;
    CHECK((trapezoid_time_integral(affine).values - exact).norm() <= 1e-12 * exact.norm());
  }
}

TEST_CASE("L2 norms: zero, constant and sin(pi x)") {
  const SpaceGrid xs(101, 0.0, 1.0);
  CHECK(norm_l2_space(SpatialField(xs)) == 0.0);
  CHECK(norm_l2_space(constant_field(xs, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  const auto s = SpatialField::from_function(xs, [](double x) { return std::sin(kPi * x); });
  CHECK(std::abs(norm_l2_space(s) - 1.0 / std::sqrt(2.0)) < 1e-3);

  const TimeGrid ts(51, 0.1);
  CHECK(norm_l2_spacetime(SpaceTimeField(ts, xs)) == 0.0);
  const auto one = SpaceTimeField::from_function(ts, xs, [](double, double) { return 1.0; });
  CHECK(norm_l2_spacetime(one) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-13));
}

TEST_CASE("norms are absolutely homogeneous") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const SpaceGrid xs(33, -1.0, 2.0);
  const TimeGrid ts(17, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    SpaceTimeField f(ts, xs);
    fill_interior(f, rng);
    SpatialField s(xs);
    fill_interior(s, rng);
    const double c = 5.0 * g(rng);
    CHECK(norm_l2_spacetime(SpaceTimeField(ts, xs, c * f.values)) ==
          doctest::Approx(std::abs(c) * norm_l2_spacetime(f)).epsilon(1e-13));
    CHECK(norm_l2_space(SpatialField(xs, c * s.values)) == doctest::Approx(std::abs(c) * norm_l2_space(s)).epsilon(1e-13));
    CHECK(inner_l2_space(s, s) == doctest::Approx(norm_l2_space(s) * norm_l2_space(s)).epsilon(1e-13));
    CHECK(inner_l2_spacetime(f, f) == doctest::Approx(norm_l2_spacetime(f) * norm_l2_spacetime(f)).epsilon(1e-13));
  }
}

TEST_CASE("slices round-trip through set_slice") {
  const SpaceGrid xs(9, 0.0, 1.0);
  const TimeGrid ts(4, 1.0);
  SpaceTimeField f(ts, xs);
  const auto g = SpatialField::from_function(xs, [](double x) { return x * x; });
  f.set_slice(2, g);
  CHECK((f.slice(2).values - g.values).norm() == 0.0);
  CHECK(f.slice(1).values.norm() == 0.0);
  CHECK_THROWS_AS(f.set_slice(0, SpatialField(SpaceGrid(10, 0.0, 1.0))), StructuralError);
}
