#pragma once

#include "rxinv/forward.hpp"
#include "rxinv/stopping.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rxinv {

/// Landweber step control: omega = safety / ||F'||^2_est, with the operator
/// norm estimated by power iteration and refreshed on every backtrack.
struct StepPolicy {
  double safety = 0.9;
  int power_iterations = 12;
  int max_backtracks = 30;
  bool backtracking = true;
  // Current step length; estimated on first use and carried between runs.
  std::optional<double> omega;
};

struct LowerState {
  SpaceTimeField u;
  double residual_norm = 0.0;
  int iterations_used = 0;
  // ||F(u_k)|| for k = 0 .. iterations_used.
  std::vector<double> history;
};

/// Inner product on the state space used by the lower adjoint.
///  parabolic: |h(0)|_H^2 + |h|_U^2 + |dh/dt|_{U*}^2, equivalent to the norm of
///             V = H^1(U*) n L^2(U). The adjoint solves a bi-Laplacian wave
///             equation in (t, x), and F' is well conditioned uniformly in dt, h.
///  elliptic:  U = L^2(0,T; H^1_0) only. The adjoint is one bi-Laplace solve per
///             slice, but ||F'|| grows like 1/dt.
enum class LowerMetric { parabolic, elliptic };

LowerMetric parse_lower_metric(std::string_view name);
std::string to_string(LowerMetric metric);

/// Where the lower run sits inside the upper loop (for noise-coupled and
/// posterior rules).
struct LowerContext {
  int j = 0;
  double previous_misfit = 0.0;
  int max_iterations = 100000;
  LowerMetric metric = LowerMetric::parabolic;
};

/// U* x H inner product: time weight dt on pde rows 1.., (-Lap)^{-1} in space,
/// plain l2 on the initial-condition component.
double residual_inner(const PdeProblem& problem, const ResidualPair& a, const ResidualPair& b);
double residual_norm(const PdeProblem& problem, const ResidualPair& r);

/// State inner product. elliptic: trapezoid weights in time, (-Lap) in space.
/// parabolic: l2 on the first slice, then dt-weighted (-Lap) on slices 1.. plus
/// backward differences in (-Lap)^{-1}.
double state_inner(const PdeProblem& problem, const SpaceTimeField& h, const SpaceTimeField& z,
                   LowerMetric metric = LowerMetric::parabolic);
double state_norm(const PdeProblem& problem, const SpaceTimeField& h, LowerMetric metric = LowerMetric::parabolic);

/// Jacobian of pde_residual in u. The reaction term uses the exact slope of the
/// interpolated curve, so this is the derivative of the discrete residual map.
ResidualPair linearized_apply(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              const SpaceTimeField& h);

/// Transpose of linearized_apply with respect to the chosen state product and
/// U* x H. Exact up to rounding: the metric is inverted in the sine basis.
SpaceTimeField lower_adjoint(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                             const ResidualPair& pair, LowerMetric metric = LowerMetric::parabolic);

/// Power-iteration estimate of ||F'(u)||^2.
double estimate_lower_norm_sq(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              int iterations, LowerMetric metric = LowerMetric::parabolic);

/// Landweber iteration u <- u - omega F'(u)^* F(u) until `rule` fires. Every
/// run takes at least one step.
LowerState lower_run(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u_init,
                     const StoppingRule& rule, StepPolicy& step, const LowerContext& ctx = {});

}  // namespace rxinv
