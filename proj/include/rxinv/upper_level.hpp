#pragma once

#include "rxinv/forward.hpp"
#include "rxinv/lower_level.hpp"
#include "rxinv/reaction.hpp"
#include "rxinv/stopping.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rxinv {

enum class InversionMode { standard, sequential };

InversionMode parse_inversion_mode(const std::string& s);
std::string to_string(InversionMode m);

/// How Pi'(u(t, x)) is formed inside linearized and adjoint equations.
enum class SlopeModel {
  // Finite-difference derivative_curve, linearly interpolated to u.
  interpolated_derivative,
  // Exact slope of the piecewise-linear curve (derivative of the discrete map).
  secant,
};

/// Pi'(u) at every node of u.
SpaceTimeField reaction_slope(const ReactionCurve& curve, const SpaceTimeField& u, SlopeModel model);

enum class TimeScheme { implicit, semi_implicit };

/// p = S'(Pi) xi: p_t - a p_xx + b p + Pi'(u) p = -xi(u), p(0) = 0. The implicit
/// scheme linearizes pde_residual; semi_implicit linearizes reference_solve.
SpaceTimeField linearized_solve(const PdeProblem& problem, const SpaceTimeField& u, const SpaceTimeField& slope,
                                const ReactionCurve& xi, TimeScheme scheme);

/// Backward-in-time adjoint state, the transpose of the implicit linearized
/// solve under the data inner product. Full data enter as a source with
/// z(T) = 0; terminal data enter as the final value.
SpaceTimeField adjoint_state(const PdeProblem& problem, const SpaceTimeField& slope, const Observation& v);
SpaceTimeField adjoint_state(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                             const Observation& v);

/// Time weights of the adjoint integral: dt on rows 1.., 0 on row 0 (the
/// quadrature under which adjoint_state is an exact transpose).
std::vector<double> adjoint_time_weights(const TimeGrid& time);

/// Discrete form of -F^{-1}[(1 + w^2)^{-s} int int e^{-i w u} z dt dx]: the
/// X-representer of xi -> -int int xi(u) z, with xi(u) the same clamped linear
/// interpolation that evaluate uses. So <xi, result>_X is exact for any xi.
ReactionCurve adjoint_integral(const SpaceTimeField& u, const SpaceTimeField& z, const SobolevSpec& spec,
                               const RangeGrid& grid);

/// S~'(Pi)^* L^* (L u - y) evaluated at the lower-level state.
ReactionCurve upper_gradient(const PdeProblem& problem, const ReactionCurve& curve, const LowerState& lower_out,
                             const Observation& obs, const SobolevSpec& spec);

/// 1/2 ||L u - y||^2 with the observation's inner product.
double data_misfit(const Observation& obs, const SpaceTimeField& u);

/// Power-iteration estimate of ||G'||^2 in X.
double estimate_upper_norm_sq(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              ObservationMode mode, const SobolevSpec& spec, int iterations);

struct InversionConfig {
  InversionMode mode = InversionMode::sequential;
  SobolevSpec sobolev;
  StoppingRule lower_rule = ResidualThreshold{1e-3};
  StoppingRule upper_rule = FixedCount{1000};
  StepPolicy lower_step;
  StepPolicy upper_step;
  LowerMetric lower_metric = LowerMetric::parabolic;
  int max_upper_iterations = 1000;
  int max_lower_iterations = 20000;
  // Upper iterations whose lower-level state is kept in the log.
  std::vector<int> snapshot_iterations;

  void validate() const;
};

struct Truth {
  ReactionCurve curve;
  SpaceTimeField state;
};

struct RunRecord {
  int j = 0;
  int kappa = 0;
  double lower_residual = 0.0;
  double misfit = 0.0;
  // Relative l2 error of the curve on the range grid (NaN without truth).
  double param_error = 0.0;
  // ||u^j - u_true|| in L2 (NaN without truth).
  double state_error = 0.0;
  double wall_ms = 0.0;
};

struct RunLog {
  std::vector<RunRecord> records;
  std::map<int, SpaceTimeField> snapshots;
  std::map<int, ReactionCurve> curve_snapshots;
  std::string stop_reason;
  int upper_backtracks = 0;
  long total_lower_iterations = 0;

  long kappa_sum() const;
};

struct InversionResult {
  ReactionCurve curve;
  RunLog log;
  SpaceTimeField final_state;
};

/// Thrown when an inversion cannot continue; carries the last accepted iterate.
class InversionFailure : public std::runtime_error {
 public:
  InversionFailure(const std::string& what, ReactionCurve last_curve, RunLog log)
      : std::runtime_error(what), last_curve_(std::move(last_curve)), log_(std::move(log)) {}
  const ReactionCurve& last_curve() const { return last_curve_; }
  const RunLog& log() const { return log_; }

 private:
  ReactionCurve last_curve_;
  RunLog log_;
};

/// Bi-level Landweber: lower Landweber for the state, upper Landweber for the
/// reaction curve. Sequential mode starts every lower run at the previous lower
/// output; standard mode restarts from `warm_start` (zero when absent).
InversionResult run_inversion(const PdeProblem& problem, const ReactionCurve& curve_init, const Observation& obs,
                              const InversionConfig& cfg, const std::optional<Truth>& truth = std::nullopt,
                              const std::optional<SpaceTimeField>& warm_start = std::nullopt);

/// Header j,kappa,lower_residual,misfit,param_error,state_error,wall_ms. The
/// wall_ms column is left empty unless `with_timing` is set, keeping logs
/// byte-reproducible.
void write_run_log_csv(const RunLog& log, std::ostream& out, bool with_timing = false);

}  // namespace rxinv
