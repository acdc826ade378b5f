#include "doctest.h"
#include "support.hpp"

#include "rxinv/errors.hpp"

using namespace rxtest;

TEST_CASE("builtin laws at reference points") {
  CHECK(builtin_law(BuiltinReaction::fisher, 0.0) == 0.0);
  CHECK(builtin_law(BuiltinReaction::fisher, 0.5) == doctest::Approx(1.0));
  CHECK(builtin_law(BuiltinReaction::lane_emden, 1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(builtin_law(BuiltinReaction::zfk, 1.0) == 0.0);
  for (const auto& name : builtin_reaction_names()) CHECK(to_string(parse_builtin_reaction(name)) == name);
  CHECK_THROWS_AS(parse_builtin_reaction("arrhenius"), ConfigError);
}

TEST_CASE("evaluate interpolates linearly and clamps") {
  const RangeGrid rg = default_range();
  const ReactionCurve identity = ReactionCurve::from_function(rg, [](double u) { return u; });
  for (double u : {-1.0, -0.731, 0.0, 0.37, 0.999, 1.0}) CHECK(identity(u) == doctest::Approx(u).epsilon(1e-14));
  CHECK(identity(1.7) == doctest::Approx(1.0));
  CHECK(identity(-3.0) == doctest::Approx(-1.0));
  CHECK(identity.secant_slope(2.0) == 0.0);

  const ReactionCurve zero(rg);
  const PdeProblem p = default_problem();
  const SpaceTimeField u = reference_solve(p, zero);
  CHECK(evaluate(zero, u).values.norm() == 0.0);
  const SpaceTimeField id = evaluate(identity, u);
  CHECK((id.values - u.values).norm() <= 1e-13 * u.values.norm());

  // Interpolation error bound h_r^2 max|Pi''| / 8 with Pi'' = -8.
  const ReactionCurve fisher = builtin_reaction("fisher", rg);
  const double bound = rg.h() * rg.h() * 8.0 / 8.0;
  CHECK(std::abs(fisher(0.37) - 4.0 * 0.37 * 0.63) <= bound);
}

TEST_CASE("evaluate is monotone in the curve") {
  std::mt19937_64 rng(21);
  const RangeGrid rg = default_range();
  const PdeProblem p = default_problem();
  SpaceTimeField u(p.time(), p.space());
  fill_interior(u, rng, 0, 0.8);
  for (int trial = 0; trial < 10; ++trial) {
    const ReactionCurve lo = random_curve(rg, rng);
    ReactionCurve hi = lo;
    hi.samples += random_curve(rg, rng).samples.cwiseAbs();
    const RowMatrix diff = evaluate(hi, u).values - evaluate(lo, u).values;
    CHECK(diff.minCoeff() >= 0.0);
  }
}

TEST_CASE("derivative curve of linear, constant and quadratic curves") {
  const RangeGrid rg = default_range();
  const auto d_id = derivative_curve(ReactionCurve::from_function(rg, [](double u) { return u; }));
  const auto d_c = derivative_curve(ReactionCurve::from_function(rg, [](double) { return 2.5; }));
  const auto d_f = derivative_curve(builtin_reaction("fisher", rg));
  for (int m = 0; m < rg.size(); ++m) {
    CHECK(d_id.samples[m] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(d_c.samples[m]) < 1e-12);
  }
  for (int m = 1; m + 1 < rg.size(); ++m) CHECK(d_f.samples[m] == doctest::Approx(4.0 - 8.0 * rg.node(m)).epsilon(1e-10));
}

TEST_CASE("Sobolev Riesz map: s = 0, constants and cosine eigenvectors") {
  const RangeGrid rg = default_range();
  std::mt19937_64 rng(23);
  const ReactionCurve raw = random_curve(rg, rng);
  for (auto ext : {SobolevExtension::even, SobolevExtension::periodic}) {
    CAPTURE(to_string(ext));
    const SobolevSpec s0{0.0, ext};
    CHECK((sobolev_riesz(raw, s0).samples - raw.samples).norm() <= 1e-13 * raw.samples.norm());
    const ReactionCurve c = ReactionCurve::from_function(rg, [](double) { return 0.7; });
    const SobolevSpec s15{1.5, ext};
    CHECK((sobolev_riesz(c, s15).samples - c.samples).norm() <= 1e-13);
  }

  const int n = rg.size();
  for (int k : {1, 2, 5}) {
    // Half-sample symmetric cosines are eigenvectors of the mirrored DFT.
    const SobolevSpec spec{1.5, SobolevExtension::even};
    ReactionCurve e(rg);
    for (int m = 0; m < n; ++m) e.samples[m] = std::cos(kPi * k * (m + 0.5) / n);
    const double w = kPi * k / (n * rg.h());
    const double mult = std::pow(1.0 + w * w, -1.5);
    CHECK((sobolev_riesz(e, spec).samples - mult * e.samples).norm() <= 1e-10);

    const SobolevSpec per{1.5, SobolevExtension::periodic};
    ReactionCurve ep(rg);
    for (int m = 0; m < n; ++m) ep.samples[m] = std::cos(2.0 * kPi * k * m / n);
    const double wp = 2.0 * kPi * k / (n * rg.h());
    CHECK((sobolev_riesz(ep, per).samples - std::pow(1.0 + wp * wp, -1.5) * ep.samples).norm() <= 1e-10);
  }
}

TEST_CASE("Sobolev Riesz map is linear, self-adjoint and a contraction") {
  const RangeGrid rg = default_range();
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g;
  for (auto ext : {SobolevExtension::even, SobolevExtension::periodic})
    for (double s : {0.5, 1.01, 1.5, 3.0}) {
      const SobolevSpec spec{s, ext};
      CHECK(sobolev_multipliers(rg, spec).maxCoeff() <= 1.0);
      for (int trial = 0; trial < 5; ++trial) {
        const ReactionCurve a = random_curve(rg, rng), b = random_curve(rg, rng);
        const double alpha = g(rng);
        const Eigen::VectorXd lin = sobolev_riesz(ReactionCurve(rg, a.samples + alpha * b.samples), spec).samples;
        const Eigen::VectorXd sep = sobolev_riesz(a, spec).samples + alpha * sobolev_riesz(b, spec).samples;
        CHECK((lin - sep).norm() <= 1e-12 * sep.norm());
        const double ab = sobolev_riesz(a, spec).samples.dot(b.samples);
        const double ba = a.samples.dot(sobolev_riesz(b, spec).samples);
        CHECK(std::abs(ab - ba) <= 1e-12 * a.samples.norm() * b.samples.norm());
        CHECK(sobolev_riesz(a, spec).samples.norm() <= a.samples.norm() * (1.0 + 1e-12));
        // The X product is the inverse of the Riesz map: <R a, b>_X = h <a, b>.
        // The inverse multipliers reach (1 + w_max^2)^s, so the tolerance scales with it.
        const double cond = 1.0 / sobolev_multipliers(rg, spec).minCoeff();
        CHECK(std::abs(sobolev_inner(sobolev_riesz(a, spec), b, spec) - rg.h() * a.samples.dot(b.samples)) <=
              1e-14 * cond * rg.h() * a.samples.norm() * b.samples.norm());
        CHECK(sobolev_norm(a, spec) > 0.0);
      }
    }
}

TEST_CASE("relative error and grid mismatch") {
  const RangeGrid rg = default_range();
  const ReactionCurve f = builtin_reaction("fisher", rg);
  CHECK(relative_error(ReactionCurve(rg), f) == doctest::Approx(1.0));
  CHECK(relative_error(f, f) == 0.0);
  CHECK_THROWS_AS(relative_error(f, ReactionCurve(RangeGrid(20, -1, 1))), StructuralError);
  CHECK_THROWS_AS(ReactionCurve(rg, Eigen::VectorXd::Zero(3)), StructuralError);
}
