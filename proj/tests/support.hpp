#pragma once

#include "rxinv/forward.hpp"
#include "rxinv/reaction.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace rxtest {

using namespace rxinv;

inline constexpr double kPi = std::numbers::pi;

inline SpatialField constant_field(const SpaceGrid& g, double c) {
  return SpatialField::from_function(g, [c](double) { return c; });
}

// 101 x 51 grid on [0,1] x [0,0.1], a = 1, b, u0 = amp sin(pi x), phi = 0.
inline PdeProblem default_problem(double b = 0.0, double amp = 1.0, int nx = 101, int nt = 51, double t_final = 0.1) {
  const SpaceGrid xs(nx, 0.0, 1.0);
  const TimeGrid ts(nt, t_final);
  SpatialField u0 = SpatialField::from_function(xs, [amp](double x) { return amp * std::sin(kPi * x); });
  u0[0] = 0.0;
  u0[nx - 1] = 0.0;
  return PdeProblem(constant_field(xs, 1.0), constant_field(xs, b), SpaceTimeField(ts, xs), u0);
}

inline RangeGrid default_range() { return RangeGrid(50, -1.0, 1.0); }

inline void fill_interior(SpaceTimeField& f, std::mt19937_64& rng, int first_row = 0, double scale = 1.0) {
  std::normal_distribution<double> g;
  for (int n = first_row; n < f.time.size(); ++n)
    for (int i = 1; i + 1 < f.space.size(); ++i) f.values(n, i) = scale * g(rng);
}

inline void fill_interior(SpatialField& f, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (int i = 1; i + 1 < f.grid.size(); ++i) f[i] = g(rng);
}

inline ReactionCurve random_curve(const RangeGrid& grid, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  ReactionCurve c(grid);
  for (int m = 0; m < grid.size(); ++m) c.samples[m] = scale * g(rng);
  return c;
}

// Manufactured solution u*(t, x) = e^{-t} sin(pi x) for the Fisher curve, with
// phi built from the curve itself so that interpolation error does not enter.
// Returns the max nodal error of reference_solve.
inline double manufactured_error(int nx, int nt) {
  const SpaceGrid xs(nx, 0.0, 1.0);
  const TimeGrid ts(nt, 0.1);
  const ReactionCurve curve = builtin_reaction("fisher", default_range());
  auto exact = [](double t, double x) { return std::exp(-t) * std::sin(kPi * x); };
  SpaceTimeField phi = SpaceTimeField::from_function(ts, xs, [&](double t, double x) {
    const double u = exact(t, x);
    return -u + kPi * kPi * u + curve(u);
  });
  SpatialField u0 = SpatialField::from_function(xs, [&](double x) { return exact(0.0, x); });
  u0[0] = u0[nx - 1] = 0.0;
  const PdeProblem p(constant_field(xs, 1.0), constant_field(xs, 0.0), phi, u0);
  const SpaceTimeField u = reference_solve(p, curve);
  double err = 0.0;
  for (int n = 0; n < nt; ++n)
    for (int i = 0; i < nx; ++i) err = std::max(err, std::abs(u.values(n, i) - exact(ts.node(n), xs.node(i))));
  return err;
}

}  // namespace rxtest
