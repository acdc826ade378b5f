#include "rxinv/lower_level.hpp"

#include "rxinv/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace rxinv {

namespace {

using Row = std::vector<double>;

// (-Lap)^{-1} x on a full-length vector.
void neg_laplacian_inverse(const DirichletLaplacian& lap, std::span<const double> x, std::span<double> out) {
  lap.solve(x, out);
  for (double& v : out) v = -v;
}

RowMatrix interior_block(const SpaceTimeField& f) {
  return f.values.middleCols(1, f.space.size() - 2);
}

double interior_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double residual_inner(const PdeProblem& problem, const ResidualPair& a, const ResidualPair& b) {
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const double dt = problem.time().dt();
  const double h = problem.space().h();
  const auto& lap = problem.ops().laplacian;
  Row s(nx);
  double sum = 0.0;
  for (int n = 1; n < nt; ++n) {
    neg_laplacian_inverse(lap, b.pde.row(n), s);
    sum += dt * h * interior_dot(a.pde.row(n), s);
  }
  sum += h * interior_dot({a.init.values.data(), static_cast<std::size_t>(nx)},
                          {b.init.values.data(), static_cast<std::size_t>(nx)});
  return sum;
}

double residual_norm(const PdeProblem& problem, const ResidualPair& r) {
  return std::sqrt(std::max(0.0, residual_inner(problem, r, r)));
}

LowerMetric parse_lower_metric(std::string_view name) {
  if (name == "parabolic") return LowerMetric::parabolic;
  if (name == "elliptic") return LowerMetric::elliptic;
  throw ConfigError(fmt::format("unknown lower metric '{}' (expected parabolic or elliptic)", name));
}

std::string to_string(LowerMetric metric) {
  return metric == LowerMetric::parabolic ? "parabolic" : "elliptic";
}

double state_inner(const PdeProblem& problem, const SpaceTimeField& h, const SpaceTimeField& z, LowerMetric metric) {
  const auto& sine = problem.ops().sine;
  const int nt = problem.time().size();
  const int m = sine.size();
  const RowMatrix hh = sine.transform(interior_block(h));
  const RowMatrix zh = sine.transform(interior_block(z));
  const auto& lambda = sine.eigenvalues();
  const double dt = problem.time().dt();
  double sum = 0.0;
  if (metric == LowerMetric::elliptic) {
    for (int n = 0; n < nt; ++n)
      sum += problem.time().weight(n) * (hh.row(n).array() * zh.row(n).array() * lambda.transpose().array()).sum();
    return problem.space().h() * sum;
  }
  // |h_0|_H^2 + sum_{n>=1} dt (|h_n|_U^2 + |D h_n|_{U*}^2).
  sum = hh.row(0).dot(zh.row(0));
  for (int n = 1; n < nt; ++n)
    for (int k = 0; k < m; ++k)
      sum += dt * lambda[k] * hh(n, k) * zh(n, k) + (hh(n, k) - hh(n - 1, k)) * (zh(n, k) - zh(n - 1, k)) / (dt * lambda[k]);
  return problem.space().h() * sum;
}

double state_norm(const PdeProblem& problem, const SpaceTimeField& h, LowerMetric metric) {
  return std::sqrt(std::max(0.0, state_inner(problem, h, h, metric)));
}

ResidualPair linearized_apply(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              const SpaceTimeField& h) {
  require_same_shape(u, h);
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const double inv_dt = 1.0 / problem.time().dt();
  const auto& lap = problem.ops().laplacian;
  ResidualPair r(problem);
  Row lap_h(nx);
  for (int n = 1; n < nt; ++n) {
    lap.apply(h.row(n), lap_h);
    for (int i = 1; i < nx - 1; ++i) {
      const double hn = h.values(n, i);
      r.pde.values(n, i) = (hn - h.values(n - 1, i)) * inv_dt - problem.a()[i] * lap_h[i] +
                           (problem.b()[i] + curve.secant_slope(u.values(n, i))) * hn;
    }
  }
  for (int i = 1; i < nx - 1; ++i) r.init[i] = h.values(0, i);
  return r;
}

SpaceTimeField lower_adjoint(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                             const ResidualPair& pair, LowerMetric metric) {
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const int last = nt - 1;
  const double dt = problem.time().dt();
  const auto& lap = problem.ops().laplacian;

  // l2 representer g of h -> <F'h, pair>:
  //   g_0 = q - s_1,  g_n = s_n - s_{n+1} + dt (-Lap(a s_n) + (b + m_n) s_n),  s_n = (-Lap)^{-1} r_n.
  SpaceTimeField s(problem.time(), problem.space());
  for (int n = 1; n <= last; ++n) neg_laplacian_inverse(lap, pair.pde.row(n), s.row(n));
  SpaceTimeField g(problem.time(), problem.space());
  Row as(nx), lap_as(nx);
  for (int i = 1; i < nx - 1; ++i) g.values(0, i) = pair.init[i] - (last >= 1 ? s.values(1, i) : 0.0);
  for (int n = 1; n <= last; ++n) {
    for (int i = 0; i < nx; ++i) as[i] = problem.a()[i] * s.values(n, i);
    lap.apply(as, lap_as);
    for (int i = 1; i < nx - 1; ++i) {
      const double sn = s.values(n, i);
      const double next = n < last ? s.values(n + 1, i) : 0.0;
      g.values(n, i) = sn - next + dt * (-lap_as[i] + (problem.b()[i] + curve.secant_slope(u.values(n, i))) * sn);
    }
  }

  // Invert the Gram operator of the state product, mode by mode.
  const auto& sine = problem.ops().sine;
  const auto& lambda = sine.eigenvalues();
  const int m = sine.size();
  RowMatrix gh = sine.transform(interior_block(g));
  RowMatrix zh(nt, m);
  if (metric == LowerMetric::elliptic) {
    for (int n = 0; n < nt; ++n)
      for (int k = 0; k < m; ++k) zh(n, k) = gh(n, k) / (lambda[k] * problem.time().weight(n));
  } else {
    // Gram matrix of the parabolic product in mode k, scaled by lambda:
    // (lambda [n = 0] + dt lambda^2 [n > 0]) z_n + (1/dt)(second difference in n) z = lambda g_n.
    std::vector<double> diag(nt), cprime(nt), rhs(nt);
    const double off = -1.0 / dt;
    for (int k = 0; k < m; ++k) {
      const double l = lambda[k];
      for (int n = 0; n < nt; ++n) {
        diag[n] = (n == 0 ? l : dt * l * l) + ((n > 0) + (n < last)) / dt;
        rhs[n] = l * gh(n, k);
      }
      // Thomas sweep; the system is symmetric positive definite.
      cprime[0] = off / diag[0];
      rhs[0] /= diag[0];
      for (int n = 1; n < nt; ++n) {
        const double denom = diag[n] - off * cprime[n - 1];
        cprime[n] = off / denom;
        rhs[n] = (rhs[n] - off * rhs[n - 1]) / denom;
      }
      zh(last, k) = rhs[last];
      for (int n = last - 1; n >= 0; --n) zh(n, k) = rhs[n] - cprime[n] * zh(n + 1, k);
    }
  }
  SpaceTimeField z(problem.time(), problem.space());
  z.values.middleCols(1, m) = sine.transform(zh);
  return z;
}

double estimate_lower_norm_sq(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              int iterations, LowerMetric metric) {
  SpaceTimeField v(problem.time(), problem.space());
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int n = 0; n < v.time.size(); ++n)
    for (int i = 1; i + 1 < v.space.size(); ++i) v.values(n, i) = dist(rng);
  v.values /= state_norm(problem, v, metric);
  double lambda = 0.0;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    SpaceTimeField w = lower_adjoint(problem, curve, u, linearized_apply(problem, curve, u, v), metric);
    lambda = state_inner(problem, v, w, metric);
    const double wn = state_norm(problem, w, metric);
    if (!(wn > 0.0)) break;
    v.values = w.values / wn;
  }
  return lambda;
}

LowerState lower_run(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u_init,
                     const StoppingRule& rule, StepPolicy& step, const LowerContext& ctx) {
  validate_lower(rule);
  require_same_shape(u_init, SpaceTimeField(problem.time(), problem.space()));
  LowerState state{u_init, 0.0, 0, {}};
  ResidualPair r = pde_residual(problem, curve, state.u);
  state.residual_norm = residual_norm(problem, r);
  state.history.push_back(state.residual_norm);

  auto refresh = [&] {
    const double norm_sq = estimate_lower_norm_sq(problem, curve, state.u, step.power_iterations, ctx.metric);
    if (!(norm_sq > 0.0)) throw NumericError("lower level: operator norm estimate is not positive");
    return step.safety / norm_sq;
  };
  if (!step.omega) step.omega = refresh();

  do {
    const SpaceTimeField grad = lower_adjoint(problem, curve, state.u, r, ctx.metric);
    int backtracks = 0;
    while (true) {
      SpaceTimeField candidate = state.u;
      candidate.values -= *step.omega * grad.values;
      if (!all_finite(candidate)) throw DivergenceError("lower level: non-finite iterate");
      ResidualPair r_new = pde_residual(problem, curve, candidate);
      const double norm_new = residual_norm(problem, r_new);
      if (!step.backtracking || norm_new <= state.residual_norm) {
        state.u = std::move(candidate);
        r = std::move(r_new);
        state.residual_norm = norm_new;
        break;
      }
      if (++backtracks > step.max_backtracks)
        throw StagnationError(fmt::format(
            "lower level stagnated at iteration {} (j = {}): residual {:.6e} not reduced after {} halvings",
            state.iterations_used, ctx.j, state.residual_norm, step.max_backtracks));
      step.omega = std::min(*step.omega * 0.5, refresh());
    }
    ++state.iterations_used;
    state.history.push_back(state.residual_norm);
  } while (!lower_should_stop(rule, state.iterations_used, state.residual_norm, ctx.j, ctx.previous_misfit) &&
           state.iterations_used < ctx.max_iterations);
  return state;
}

}  // namespace rxinv
