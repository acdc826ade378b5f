#include "rxinv/forward.hpp"

#include "rxinv/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <random>
#include <vector>

namespace rxinv {

PdeProblem::PdeProblem(SpatialField a, SpatialField b, SpaceTimeField phi, SpatialField u0)
    : a_(std::move(a)), b_(std::move(b)), phi_(std::move(phi)), u0_(std::move(u0)) {
  require_same_shape(a_, u0_);
  require_same_shape(b_, u0_);
  if (!(phi_.space == u0_.grid)) throw StructuralError("source term lives on a different space grid");
  for (int i = 0; i < a_.grid.size(); ++i)
    if (!(a_[i] > 0.0)) throw ConfigError("diffusivity must be strictly positive");
  const int last = u0_.grid.size() - 1;
  if (std::abs(u0_[0]) > 1e-12 || std::abs(u0_[last]) > 1e-12)
    throw ConfigError("initial condition must vanish on the boundary");
  if (!a_.values.allFinite() || !b_.values.allFinite() || !all_finite(phi_) || !u0_.values.allFinite())
    throw ConfigError("problem data must be finite");
  ops_ = std::make_shared<const GridOperators>(u0_.grid);
}

PdeProblem PdeProblem::with_phi(SpaceTimeField phi) const { return PdeProblem(a_, b_, std::move(phi), u0_); }
PdeProblem PdeProblem::with_u0(SpatialField u0) const { return PdeProblem(a_, b_, phi_, std::move(u0)); }

ObservationMode parse_observation_mode(const std::string& s) {
  if (s == "full") return ObservationMode::full;
  if (s == "terminal") return ObservationMode::terminal;
  throw ConfigError("unknown observation mode '" + s + "'");
}

std::string to_string(ObservationMode m) { return m == ObservationMode::full ? "full" : "terminal"; }

double Observation::norm() const {
  return mode == ObservationMode::full ? norm_l2_spacetime(full()) : norm_l2_space(terminal());
}

namespace {

void require_problem_shape(const PdeProblem& problem, const SpaceTimeField& u) {
  if (!(u.time == problem.time()) || !(u.space == problem.space()))
    throw StructuralError("state field does not match the problem grids");
}

}  // namespace

ResidualPair pde_residual(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u) {
  require_problem_shape(problem, u);
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const double inv_dt = 1.0 / problem.time().dt();
  const auto& lap = problem.ops().laplacian;
  ResidualPair r(problem);
  std::vector<double> lap_u(nx);
  for (int n = 1; n < nt; ++n) {
    lap.apply(u.row(n), lap_u);
    for (int i = 1; i < nx - 1; ++i) {
      const double un = u.values(n, i);
      r.pde.values(n, i) = (un - u.values(n - 1, i)) * inv_dt - problem.a()[i] * lap_u[i] + problem.b()[i] * un +
                           curve(un) - problem.phi().values(n, i);
    }
  }
  for (int i = 1; i < nx - 1; ++i) r.init[i] = u.values(0, i) - problem.u0()[i];
  return r;
}

SpaceTimeField reference_solve(const PdeProblem& problem, const ReactionCurve& curve) {
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const double dt = problem.time().dt();
  std::vector<double> zeros(nx, 0.0);
  const BandedLU step = implicit_step_operator(problem.space(), {problem.a().values.data(), static_cast<std::size_t>(nx)},
                                               zeros, dt, false);
  SpaceTimeField u(problem.time(), problem.space());
  u.set_slice(0, problem.u0());
  std::vector<double> rhs(nx);
  for (int n = 0; n + 1 < nt; ++n) {
    for (int i = 0; i < nx; ++i) {
      const double un = u.values(n, i);
      rhs[i] = un + dt * (problem.phi().values(n + 1, i) - problem.b()[i] * un - curve(un));
    }
    solve_interior(step, rhs, u.row(n + 1));
    if (!u.values.row(n + 1).allFinite())
      throw DivergenceError(fmt::format("reference solve produced non-finite values at step {}", n + 1));
  }
  return u;
}

SpaceTimeField implicit_solve(const PdeProblem& problem, const ReactionCurve& curve) {
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const double dt = problem.time().dt();
  const auto& lap = problem.ops().laplacian;
  std::span<const double> a(problem.a().values.data(), static_cast<std::size_t>(nx));
  SpaceTimeField u(problem.time(), problem.space());
  u.set_slice(0, problem.u0());
  std::vector<double> w(nx), g(nx), lap_w(nx), c(nx), delta(nx);
  constexpr int kMaxNewton = 60;
  for (int n = 1; n < nt; ++n) {
    for (int i = 0; i < nx; ++i) w[i] = u.values(n - 1, i);
    bool converged = false;
    for (int it = 0; it < kMaxNewton && !converged; ++it) {
      // dt * G(w) = w - u^{n-1} - dt (a Lap w - b w - Pi(w) + phi^n)
      lap.apply(w, lap_w);
      double g_norm = 0.0;
      for (int i = 1; i < nx - 1; ++i) {
        g[i] = w[i] - u.values(n - 1, i) +
               dt * (-a[i] * lap_w[i] + problem.b()[i] * w[i] + curve(w[i]) - problem.phi().values(n, i));
        g_norm = std::max(g_norm, std::abs(g[i]));
        c[i] = problem.b()[i] + curve.secant_slope(w[i]);
      }
      g[0] = g[nx - 1] = 0.0;
      if (g_norm < 1e-14) {
        converged = true;
        break;
      }
      const BandedLU jac = implicit_step_operator(problem.space(), a, c, dt, false);
      solve_interior(jac, g, delta);
      double step_norm = 0.0;
      for (int i = 1; i < nx - 1; ++i) {
        w[i] -= delta[i];
        step_norm = std::max(step_norm, std::abs(delta[i]));
      }
      if (step_norm < 1e-15 * (1.0 + std::abs(w[nx / 2]))) converged = true;
    }
    if (!converged) throw NumericError(fmt::format("implicit solve: Newton did not converge at step {}", n));
    for (int i = 0; i < nx; ++i) u.values(n, i) = w[i];
    if (!u.values.row(n).allFinite())
      throw DivergenceError(fmt::format("implicit solve produced non-finite values at step {}", n));
  }
  return u;
}

Observation observe(const SpaceTimeField& u, ObservationMode mode) {
  if (mode == ObservationMode::full) return Observation{mode, u, 0.0};
  return Observation{mode, u.slice(u.time.size() - 1), 0.0};
}

Observation add_noise(const Observation& obs, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw ConfigError("noise level must be non-negative");
  Observation out = obs;
  out.noise_level = delta;
  if (delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double target = delta * obs.norm();
  if (obs.mode == ObservationMode::full) {
    SpaceTimeField noise(obs.full().time, obs.full().space);
    for (int n = 0; n < noise.time.size(); ++n)
      for (int i = 1; i + 1 < noise.space.size(); ++i) noise.values(n, i) = normal(rng);
    const double scale = target / norm_l2_spacetime(noise);
    SpaceTimeField y = obs.full();
    y.values += scale * noise.values;
    out.data = std::move(y);
  } else {
    SpatialField noise(obs.terminal().grid);
    for (int i = 1; i + 1 < noise.grid.size(); ++i) noise[i] = normal(rng);
    const double scale = target / norm_l2_space(noise);
    SpatialField y = obs.terminal();
    y.values += scale * noise.values;
    out.data = std::move(y);
  }
  return out;
}

Observation observation_residual(const Observation& obs, const SpaceTimeField& u) {
  Observation lu = observe(u, obs.mode);
  if (obs.mode == ObservationMode::full) {
    require_same_shape(lu.full(), obs.full());
    std::get<SpaceTimeField>(lu.data).values -= obs.full().values;
  } else {
    require_same_shape(lu.terminal(), obs.terminal());
    std::get<SpatialField>(lu.data).values -= obs.terminal().values;
  }
  return lu;
}

void write_observation_csv(const Observation& obs, std::ostream& out) {
  if (obs.mode == ObservationMode::full) {
    const auto& y = obs.full();
    out << "t,x,value\n";
    for (int n = 0; n < y.time.size(); ++n)
      for (int i = 0; i < y.space.size(); ++i)
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", y.time.node(n), y.space.node(i), y.values(n, i));
  } else {
    const auto& y = obs.terminal();
    out << "x,value\n";
    for (int i = 0; i < y.grid.size(); ++i) out << fmt::format("{:.17g},{:.17g}\n", y.grid.node(i), y.values[i]);
  }
}

}  // namespace rxinv
