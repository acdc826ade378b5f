#include "doctest.h"
#include "support.hpp"

#include "rxinv/diagnostics.hpp"
#include "rxinv/errors.hpp"

using namespace rxtest;

TEST_CASE("rate slope of exact power laws") {
  std::vector<double> h(301, 0.0);
  for (int k = 1; k <= 300; ++k) h[k] = 3.0 * std::pow(k, -0.5);
  CHECK(fit_rate_slope(h, 10, 200) == doctest::Approx(-0.5).epsilon(1e-12));
  for (int k = 1; k <= 300; ++k) h[k] = std::pow(k, -2.0);
  CHECK(fit_rate_slope(h, 10, 200) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate_slope(h, 0, 10), StructuralError);
  CHECK_THROWS_AS(fit_rate_slope(h, 10, 10), StructuralError);
  CHECK_THROWS_AS(fit_rate_slope(std::vector<double>(12, 0.0), 1, 11), StructuralError);
}

TEST_CASE("adjoint test detects a 1% fault") {
  const PdeProblem p = default_problem();
  const ReactionCurve c = builtin_reaction("fisher", default_range());
  const SpaceTimeField u = reference_solve(p, c);
  CHECK(adjoint_test(p, c, u, 20, 5).pass);

  const LowerAdjointFn faulty = [&](const ResidualPair& pair) {
    SpaceTimeField z = lower_adjoint(p, c, u, pair);
    z.values *= 1.01;
    return z;
  };
  const DiagnosticReport bad = adjoint_test(p, c, u, 20, 5, faulty);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst > 1e3 * adjoint_test(p, c, u, 20, 5).worst);

  // A zero direction makes both sides vanish.
  const LowerAdjointFn exact = [&](const ResidualPair& pair) { return lower_adjoint(p, c, u, pair); };
  ResidualPair pair(p);
  pair.init[5] = 1.0;
  CHECK(adjoint_mismatch(p, c, u, SpaceTimeField(p.time(), p.space()), pair, exact, LowerMetric::parabolic) == 0.0);
}

TEST_CASE("diagnostics are deterministic under a fixed seed") {
  const PdeProblem p = default_problem();
  const ReactionCurve c = builtin_reaction("fisher", default_range());
  const SpaceTimeField u = reference_solve(p, c);
  CHECK(to_json(adjoint_test(p, c, u, 3, 9)) == to_json(adjoint_test(p, c, u, 3, 9)));
  const SobolevSpec spec;
  CHECK(to_json(tcc_ratio(p, c, 0.1, 3, 9, spec)) == to_json(tcc_ratio(p, c, 0.1, 3, 9, spec)));
  const auto a = band_limited_direction(default_range(), spec, 4);
  const auto b = band_limited_direction(default_range(), spec, 4);
  CHECK((a.samples - b.samples).norm() == 0.0);
  CHECK(sobolev_norm(a, spec) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gradient check at zero residual") {
  const PdeProblem p = default_problem();
  const RangeGrid rg = default_range();
  const ReactionCurve c = builtin_reaction("zfk", rg);
  const Observation y = observe(implicit_solve(p, c), ObservationMode::full);
  const ReactionCurve xi = band_limited_direction(rg, SobolevSpec{}, 3);
  const DirectionalCheck d = directional_check(p, c, y, xi, {1e-4}, SobolevSpec{});
  CHECK(std::abs(d.adjoint) < 1e-14);
  CHECK(std::abs(d.finite_difference[0]) < 1e-8);
}

TEST_CASE("tangential cone ratio: zero perturbation and small radius") {
  const PdeProblem p = default_problem();
  const ReactionCurve truth = builtin_reaction("fisher", default_range());
  CHECK(tcc_sample(p, truth, ReactionCurve(default_range()), ObservationMode::full) == 0.0);
  const DiagnosticReport r = tcc_ratio(p, truth, 0.1, 5, 3, SobolevSpec{});
  CHECK(r.pass);
  CHECK(r.samples.size() == 5u);
  CHECK_THROWS_AS(tcc_ratio(p, truth, 0.0, 5, 3, SobolevSpec{}), ConfigError);
}
