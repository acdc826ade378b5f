#include "rxinv/diagnostics.hpp"

#include "rxinv/errors.hpp"

#include <fmt/format.h>

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace rxinv {

namespace {

void fill_gaussian(SpaceTimeField& f, std::mt19937_64& rng, int first_row) {
  std::normal_distribution<double> g;
  for (int n = first_row; n < f.time.size(); ++n)
    for (int i = 1; i + 1 < f.space.size(); ++i) f.values(n, i) = g(rng);
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1e-300 ? 0.0 : std::abs(a - b) / scale;
}

void finish(DiagnosticReport& r) {
  r.worst = 0.0;
  for (const auto& s : r.samples) r.worst = std::max(r.worst, s.value);
}

}  // namespace

std::string to_json(const DiagnosticReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["tolerance"] = report.tolerance;
  j["worst"] = report.worst;
  j["pass"] = report.pass;
  j["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : report.samples) j["samples"].push_back({{"input", s.input}, {"value", s.value}});
  return j.dump(2);
}

double adjoint_mismatch(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                        const SpaceTimeField& h, const ResidualPair& pair, const LowerAdjointFn& adjoint,
                        LowerMetric metric) {
  const ResidualPair fh = linearized_apply(problem, curve, u, h);
  const double lhs = residual_inner(problem, fh, pair);
  const double rhs = state_inner(problem, h, adjoint(pair), metric);
  const double scale = residual_norm(problem, fh) * residual_norm(problem, pair);
  if (scale == 0.0) return std::abs(lhs - rhs);
  return std::abs(lhs - rhs) / scale;
}

DiagnosticReport adjoint_test(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              int trials, std::uint64_t seed, LowerMetric metric) {
  return adjoint_test(
      problem, curve, u, trials, seed,
      [&](const ResidualPair& p) { return lower_adjoint(problem, curve, u, p, metric); }, metric);
}

DiagnosticReport adjoint_test(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              int trials, std::uint64_t seed, const LowerAdjointFn& adjoint, LowerMetric metric) {
  if (trials < 1) throw ConfigError("adjoint_test needs at least one trial");
  DiagnosticReport r{"adjoint", 1e-10, 0.0, false, {}};
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    SpaceTimeField h(problem.time(), problem.space());
    ResidualPair pair(problem);
    fill_gaussian(h, rng, 0);
    fill_gaussian(pair.pde, rng, 1);
    std::normal_distribution<double> g;
    for (int i = 1; i + 1 < problem.space().size(); ++i) pair.init[i] = g(rng);
    r.samples.push_back({fmt::format("trial {}", t), adjoint_mismatch(problem, curve, u, h, pair, adjoint, metric)});
  }
  finish(r);
  r.pass = r.worst < r.tolerance;
  return r;
}

ReactionCurve band_limited_direction(const RangeGrid& grid, const SobolevSpec& spec, std::uint64_t seed,
                                     int modes) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const double length = grid.u_max() - grid.u_min();
  ReactionCurve xi(grid);
  for (int k = 0; k < modes; ++k) {
    const double c = g(rng) / (1.0 + k);
    for (int m = 0; m < grid.size(); ++m)
      xi.samples[m] += c * std::cos(k * std::numbers::pi * (grid.node(m) - grid.u_min()) / length);
  }
  const double norm = sobolev_norm(xi, spec);
  if (norm > 0.0) xi.samples /= norm;
  return xi;
}

DirectionalCheck directional_check(const PdeProblem& problem, const ReactionCurve& curve, const Observation& obs,
                                   const ReactionCurve& xi, const std::vector<double>& taus,
                                   const SobolevSpec& spec) {
  const SpaceTimeField state = implicit_solve(problem, curve);
  const LowerState exact{state, 0.0, 0, {}};
  DirectionalCheck out;
  out.adjoint = sobolev_inner(upper_gradient(problem, curve, exact, obs, spec), xi, spec);
  for (double tau : taus) {
    ReactionCurve plus = curve, minus = curve;
    plus.samples += tau * xi.samples;
    minus.samples -= tau * xi.samples;
    const double fd = (data_misfit(obs, implicit_solve(problem, plus)) -
                       data_misfit(obs, implicit_solve(problem, minus))) / (2.0 * tau);
    out.finite_difference.push_back(fd);
    out.relative_error.push_back(relative_gap(fd, out.adjoint));
  }
  return out;
}

DiagnosticReport gradient_check(const PdeProblem& problem, const ReactionCurve& curve, const Observation& obs,
                                int directions, const std::vector<double>& taus, const SobolevSpec& spec,
                                std::uint64_t seed) {
  if (directions < 1 || taus.empty()) throw ConfigError("gradient_check needs directions and step sizes");
  DiagnosticReport r{"gradient", 1e-2, 0.0, false, {}};
  std::vector<double> best;
  for (int d = 0; d < directions; ++d) {
    const ReactionCurve xi = band_limited_direction(curve.grid, spec, seed + d);
    const DirectionalCheck c = directional_check(problem, curve, obs, xi, taus, spec);
    const auto it = std::min_element(c.relative_error.begin(), c.relative_error.end());
    const double tau = taus[static_cast<std::size_t>(it - c.relative_error.begin())];
    r.samples.push_back({fmt::format("direction {} (tau {:.0e})", d, tau), *it});
    best.push_back(*it);
  }
  finish(r);
  std::sort(best.begin(), best.end());
  const std::size_t n = best.size();
  const double median = n % 2 ? best[n / 2] : 0.5 * (best[n / 2 - 1] + best[n / 2]);
  r.pass = median < r.tolerance;
  return r;
}

double tcc_sample(const PdeProblem& problem, const ReactionCurve& truth, const ReactionCurve& xi,
                  ObservationMode mode) {
  ReactionCurve pi = truth;
  pi.samples += xi.samples;
  const SpaceTimeField u = reference_solve(problem, pi);
  const SpaceTimeField u_true = reference_solve(problem, truth);
  const SpaceTimeField p =
      linearized_solve(problem, u, reaction_slope(pi, u, SlopeModel::secant), xi, TimeScheme::semi_implicit);
  SpaceTimeField diff(problem.time(), problem.space(), u.values - u_true.values);
  SpaceTimeField remainder(problem.time(), problem.space(), diff.values - p.values);
  const double den = observe(diff, mode).norm();
  const double num = observe(remainder, mode).norm();
  if (num < 1e-12 && den < 1e-12) return 0.0;
  return num / den;
}

DiagnosticReport tcc_ratio(const PdeProblem& problem, const ReactionCurve& truth, double radius, int samples,
                           std::uint64_t seed, const SobolevSpec& spec, ObservationMode mode) {
  if (!(radius > 0.0)) throw ConfigError("tcc radius must be > 0");
  if (samples < 1) throw ConfigError("tcc_ratio needs at least one sample");
  DiagnosticReport r{"tcc", 1.0, 0.0, false, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> scale(0.5, 1.0);
  for (int s = 0; s < samples; ++s) {
    const double norm = radius * scale(rng);
    ReactionCurve xi = band_limited_direction(truth.grid, spec, rng());
    xi.samples *= norm;
    r.samples.push_back({fmt::format("sample {} (|xi|_X {:.4f})", s, norm), tcc_sample(problem, truth, xi, mode)});
  }
  finish(r);
  r.pass = r.worst < r.tolerance;
  return r;
}

double fit_rate_slope(const std::vector<double>& history, int k_lo, int k_hi) {
  if (k_lo < 1 || k_hi <= k_lo) throw StructuralError("fit_rate_slope needs 1 <= k_lo < k_hi");
  std::vector<double> x, y;
  for (int k = k_lo; k <= k_hi && k < static_cast<int>(history.size()); ++k) {
    if (!(history[k] > 0.0)) continue;
    x.push_back(std::log(static_cast<double>(k)));
    y.push_back(std::log(history[k]));
  }
  if (x.size() < 3) throw StructuralError("fit_rate_slope needs at least 3 positive points in the window");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace rxinv
