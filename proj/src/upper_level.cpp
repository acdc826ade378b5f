#include "rxinv/upper_level.hpp"

#include "rxinv/errors.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace rxinv {

InversionMode parse_inversion_mode(const std::string& s) {
  if (s == "standard") return InversionMode::standard;
  if (s == "sequential") return InversionMode::sequential;
  throw ConfigError("unknown inversion mode '" + s + "'");
}

std::string to_string(InversionMode m) { return m == InversionMode::standard ? "standard" : "sequential"; }

SpaceTimeField reaction_slope(const ReactionCurve& curve, const SpaceTimeField& u, SlopeModel model) {
  if (model == SlopeModel::interpolated_derivative) return evaluate(derivative_curve(curve), u);
  SpaceTimeField m(u.time, u.space);
  for (Eigen::Index k = 0; k < u.values.size(); ++k) m.values.data()[k] = curve.secant_slope(u.values.data()[k]);
  return m;
}

namespace {

std::vector<double> diagonal(const PdeProblem& problem, const SpaceTimeField& slope, int n) {
  std::vector<double> c(problem.space().size());
  for (int i = 0; i < problem.space().size(); ++i) c[i] = problem.b()[i] + slope.values(n, i);
  return c;
}

std::span<const double> span_of(const SpatialField& f) {
  return {f.values.data(), static_cast<std::size_t>(f.values.size())};
}

}  // namespace

SpaceTimeField linearized_solve(const PdeProblem& problem, const SpaceTimeField& u, const SpaceTimeField& slope,
                                const ReactionCurve& xi, TimeScheme scheme) {
  require_same_shape(u, slope);
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const double dt = problem.time().dt();
  SpaceTimeField p(problem.time(), problem.space());
  std::vector<double> rhs(nx);
  if (scheme == TimeScheme::implicit) {
    for (int n = 1; n < nt; ++n) {
      const BandedLU op = implicit_step_operator(problem.space(), span_of(problem.a()), diagonal(problem, slope, n), dt, false);
      for (int i = 0; i < nx; ++i) rhs[i] = p.values(n - 1, i) - dt * xi(u.values(n, i));
      solve_interior(op, rhs, p.row(n));
    }
  } else {
    std::vector<double> zeros(nx, 0.0);
    const BandedLU op = implicit_step_operator(problem.space(), span_of(problem.a()), zeros, dt, false);
    for (int n = 0; n + 1 < nt; ++n) {
      for (int i = 0; i < nx; ++i) {
        const double pn = p.values(n, i);
        rhs[i] = pn - dt * ((problem.b()[i] + slope.values(n, i)) * pn + xi(u.values(n, i)));
      }
      solve_interior(op, rhs, p.row(n + 1));
    }
  }
  return p;
}

SpaceTimeField adjoint_state(const PdeProblem& problem, const SpaceTimeField& slope, const Observation& v) {
  const int nt = problem.time().size();
  const int nx = problem.space().size();
  const double dt = problem.time().dt();
  SpaceTimeField z(problem.time(), problem.space());
  std::vector<double> rhs(nx, 0.0);
  for (int n = nt - 1; n >= 0; --n) {
    if (v.mode == ObservationMode::full) {
      const auto& vf = v.full();
      require_same_shape(vf, z);
      const double w = problem.time().weight(n);
      for (int i = 0; i < nx; ++i) rhs[i] = (n + 1 < nt ? z.values(n + 1, i) : 0.0) + w * vf.values(n, i);
    } else {
      const auto& vt = v.terminal();
      require_same_shape(vt, problem.u0());
      for (int i = 0; i < nx; ++i) rhs[i] = n + 1 < nt ? z.values(n + 1, i) : vt[i];
    }
    const BandedLU op = implicit_step_operator(problem.space(), span_of(problem.a()), diagonal(problem, slope, n), dt, true);
    solve_interior(op, rhs, z.row(n));
  }
  return z;
}

SpaceTimeField adjoint_state(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                             const Observation& v) {
  return adjoint_state(problem, reaction_slope(curve, u, SlopeModel::interpolated_derivative), v);
}

std::vector<double> adjoint_time_weights(const TimeGrid& time) {
  std::vector<double> w(time.size(), time.dt());
  w[0] = 0.0;
  return w;
}

ReactionCurve adjoint_integral(const SpaceTimeField& u, const SpaceTimeField& z, const SobolevSpec& spec,
                               const RangeGrid& grid) {
  require_same_shape(u, z);
  const int n = grid.size();
  const std::vector<double> wt = adjoint_time_weights(u.time);

  // g_m = sum w z hat_m(u): the transpose of sampling a curve by clamped linear
  // interpolation, i.e. the delta kernel of the continuous formula projected
  // onto the range grid.
  ReactionCurve g(grid);
  for (int t = 0; t < u.time.size(); ++t) {
    if (wt[t] == 0.0) continue;
    for (int i = 0; i < u.space.size(); ++i) {
      const double wz = wt[t] * u.space.weight(i) * z.values(t, i);
      if (wz == 0.0) continue;
      const double pos = std::clamp((u.values(t, i) - grid.u_min()) / grid.h(), 0.0, double(n - 1));
      const int m = std::min(static_cast<int>(pos), n - 2);
      const double frac = pos - m;
      g.samples[m] += wz * (1.0 - frac);
      g.samples[m + 1] += wz * frac;
    }
  }
  // X-gradient: R g / h_r, so that <grad, xi>_X = sum_m g_m xi_m.
  ReactionCurve grad = sobolev_riesz(g, spec);
  grad.samples *= -1.0 / grid.h();
  return grad;
}

double data_misfit(const Observation& obs, const SpaceTimeField& u) {
  const double r = observation_residual(obs, u).norm();
  return 0.5 * r * r;
}

ReactionCurve upper_gradient(const PdeProblem& problem, const ReactionCurve& curve, const LowerState& lower_out,
                             const Observation& obs, const SobolevSpec& spec) {
  const Observation v = observation_residual(obs, lower_out.u);
  const SpaceTimeField z = adjoint_state(problem, curve, lower_out.u, v);
  return adjoint_integral(lower_out.u, z, spec, curve.grid);
}

double estimate_upper_norm_sq(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              ObservationMode mode, const SobolevSpec& spec, int iterations) {
  const SpaceTimeField slope = reaction_slope(curve, u, SlopeModel::interpolated_derivative);
  ReactionCurve xi(curve.grid);
  std::mt19937_64 rng(0xc0ffee);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int m = 0; m < xi.grid.size(); ++m) xi.samples[m] = dist(rng);
  xi = sobolev_riesz(xi, spec);
  xi.samples /= sobolev_norm(xi, spec);
  double lambda = 0.0;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    const SpaceTimeField p = linearized_solve(problem, u, slope, xi, TimeScheme::implicit);
    const SpaceTimeField z = adjoint_state(problem, slope, observe(p, mode));
    const ReactionCurve next = adjoint_integral(u, z, spec, curve.grid);
    lambda = sobolev_inner(xi, next, spec);
    const double nn = sobolev_norm(next, spec);
    if (!(nn > 0.0)) break;
    xi.samples = next.samples / nn;
  }
  return std::abs(lambda);
}

void InversionConfig::validate() const {
  if (!(sobolev.s > 1.0)) throw ConfigError("sobolev exponent s must be > 1");
  validate_lower(lower_rule);
  validate_upper(upper_rule);
  if (max_upper_iterations < 0) throw ConfigError("max_upper_iterations must be >= 0");
  if (max_lower_iterations < 1) throw ConfigError("max_lower_iterations must be >= 1");
  for (const StepPolicy* p : {&lower_step, &upper_step}) {
    if (!(p->safety > 0.0)) throw ConfigError("step safety factor must be > 0");
    if (p->power_iterations < 1) throw ConfigError("power_iterations must be >= 1");
    if (p->max_backtracks < 0) throw ConfigError("max_backtracks must be >= 0");
  }
}

long RunLog::kappa_sum() const {
  long s = 0;
  for (const auto& r : records) s += r.kappa;
  return s;
}

InversionResult run_inversion(const PdeProblem& problem, const ReactionCurve& curve_init, const Observation& obs,
                              const InversionConfig& cfg, const std::optional<Truth>& truth,
                              const std::optional<SpaceTimeField>& warm_start) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double y_norm = obs.norm();
  const SpaceTimeField zero_state(problem.time(), problem.space());
  const SpaceTimeField& fresh = warm_start ? *warm_start : zero_state;

  StepPolicy lower_step = cfg.lower_step;
  StepPolicy upper_step = cfg.upper_step;
  RunLog log;
  ReactionCurve curve = curve_init;
  ReactionCurve prev_curve = curve_init;
  ReactionCurve prev_grad(curve_init.grid);
  SpaceTimeField prev_state = fresh;
  double prev_misfit = observation_residual(obs, fresh).norm();

  auto fail = [&](const std::string& what) -> InversionFailure {
    log.stop_reason = "failure: " + what;
    return InversionFailure(what, prev_curve, log);
  };

  for (int j = 0;; ++j) {
    const auto t0 = clock::now();
    const SpaceTimeField& init = (cfg.mode == InversionMode::sequential && j > 0) ? prev_state : fresh;
    LowerContext ctx{j, prev_misfit, cfg.max_lower_iterations, cfg.lower_metric};

    std::optional<LowerState> lower;
    double misfit = 0.0;
    int backtracks = 0;
    while (true) {
      try {
        lower = lower_run(problem, curve, init, cfg.lower_rule, lower_step, ctx);
      } catch (const StagnationError& e) {
        throw fail(fmt::format("upper iteration {}: {}", j, e.what()));
      } catch (const DivergenceError& e) {
        throw fail(fmt::format("upper iteration {}: {}", j, e.what()));
      } catch (const NumericError& e) {
        throw fail(fmt::format("upper iteration {}: {}", j, e.what()));
      }
      log.total_lower_iterations += lower->iterations_used;
      misfit = observation_residual(obs, lower->u).norm();
      if (j == 0 || !upper_step.backtracking || misfit < prev_misfit) break;
      if (++backtracks > upper_step.max_backtracks)
        throw fail(fmt::format("upper iteration {}: misfit {:.6e} not reduced below {:.6e} after {} halvings", j,
                               misfit, prev_misfit, upper_step.max_backtracks));
      ++log.upper_backtracks;
      const double refreshed =
          upper_step.safety / estimate_upper_norm_sq(problem, prev_curve, prev_state, obs.mode, cfg.sobolev,
                                                     upper_step.power_iterations);
      upper_step.omega = std::min(*upper_step.omega * 0.5, refreshed);
      curve.samples = prev_curve.samples - *upper_step.omega * prev_grad.samples;
    }

    RunRecord rec;
    rec.j = j;
    rec.kappa = lower->iterations_used;
    rec.lower_residual = lower->residual_norm;
    rec.misfit = misfit;
    rec.param_error = truth ? relative_error(curve, truth->curve) : nan;
    rec.state_error = truth ? norm_l2_spacetime(SpaceTimeField(problem.time(), problem.space(),
                                                               lower->u.values - truth->state.values))
                            : nan;
    for (int s : cfg.snapshot_iterations)
      if (s == j) {
        log.snapshots.emplace(j, lower->u);
        log.curve_snapshots.emplace(j, curve);
      }

    const bool rule_fired = upper_should_stop(cfg.upper_rule, j, misfit, y_norm);
    if (rule_fired || j >= cfg.max_upper_iterations) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      log.records.push_back(rec);
      log.stop_reason = rule_fired ? "upper rule: " + describe(cfg.upper_rule) : "max_upper_iterations reached";
      return InversionResult{curve, std::move(log), lower->u};
    }

    const ReactionCurve grad = upper_gradient(problem, curve, *lower, obs, cfg.sobolev);
    if (!upper_step.omega) {
      const double norm_sq =
          estimate_upper_norm_sq(problem, curve, lower->u, obs.mode, cfg.sobolev, upper_step.power_iterations);
      if (!(norm_sq > 0.0)) {
        // Zero sensitivity (e.g. zero state): nothing can be updated.
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        log.records.push_back(rec);
        log.stop_reason = "zero upper-level sensitivity";
        return InversionResult{curve, std::move(log), lower->u};
      }
      upper_step.omega = upper_step.safety / norm_sq;
    }
    prev_curve = curve;
    prev_grad = grad;
    prev_state = lower->u;
    prev_misfit = misfit;
    curve.samples -= *upper_step.omega * grad.samples;
    if (!curve.samples.allFinite()) throw fail(fmt::format("upper iteration {}: non-finite reaction curve", j));

    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    log.records.push_back(rec);
  }
}

void write_run_log_csv(const RunLog& log, std::ostream& out, bool with_timing) {
  out << "j,kappa,lower_residual,misfit,param_error,state_error,wall_ms\n";
  for (const auto& r : log.records) {
    out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},", r.j, r.kappa, r.lower_residual, r.misfit,
                       r.param_error, r.state_error);
    if (with_timing) out << fmt::format("{:.3f}", r.wall_ms);
    out << '\n';
  }
}

}  // namespace rxinv
