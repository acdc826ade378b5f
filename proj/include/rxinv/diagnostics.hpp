#pragma once

#include "rxinv/lower_level.hpp"
#include "rxinv/upper_level.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rxinv {

struct DiagnosticSample {
  std::string input;
  double value = 0.0;
};

struct DiagnosticReport {
  std::string name;
  double tolerance = 0.0;
  double worst = 0.0;
  bool pass = false;
  std::vector<DiagnosticSample> samples;
};

std::string to_json(const DiagnosticReport& report);

using LowerAdjointFn = std::function<SpaceTimeField(const ResidualPair&)>;

/// |<F'h, pair> - <h, F'^* pair>| / (||F'h|| ||pair||) for one (h, pair);
/// 0 when both sides vanish.
double adjoint_mismatch(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                        const SpaceTimeField& h, const ResidualPair& pair, const LowerAdjointFn& adjoint,
                        LowerMetric metric);

/// Dot-product test of lower_adjoint on `trials` seeded Gaussian (h, pair).
/// Passes when the worst mismatch is below 1e-10.
DiagnosticReport adjoint_test(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              int trials, std::uint64_t seed, LowerMetric metric = LowerMetric::parabolic);

/// Same, with a caller-supplied adjoint (fault injection).
DiagnosticReport adjoint_test(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u,
                              int trials, std::uint64_t seed, const LowerAdjointFn& adjoint,
                              LowerMetric metric = LowerMetric::parabolic);

/// Smooth random curve: a few seeded cosine modes on the range grid, scaled
/// to unit X-norm.
ReactionCurve band_limited_direction(const RangeGrid& grid, const SobolevSpec& spec, std::uint64_t seed,
                                     int modes = 6);

struct DirectionalCheck {
  double adjoint = 0.0;
  // Central differences, one per tau.
  std::vector<double> finite_difference;
  std::vector<double> relative_error;
};

/// <grad, xi>_X against (J(Pi + tau xi) - J(Pi - tau xi)) / (2 tau), where J is
/// the misfit through the exact discrete state map implicit_solve.
DirectionalCheck directional_check(const PdeProblem& problem, const ReactionCurve& curve, const Observation& obs,
                                   const ReactionCurve& xi, const std::vector<double>& taus,
                                   const SobolevSpec& spec);

/// Samples are the best-tau relative errors of `directions` random smooth
/// directions; passes when their median is below 1e-2.
DiagnosticReport gradient_check(const PdeProblem& problem, const ReactionCurve& curve, const Observation& obs,
                                int directions, const std::vector<double>& taus, const SobolevSpec& spec,
                                std::uint64_t seed);

/// ||S(Pi) - S(Pi_true) - S'(Pi)(Pi - Pi_true)|| / ||S(Pi) - S(Pi_true)|| in the
/// data norm for Pi = Pi_true + xi, ||xi||_X = radius. S is reference_solve and
/// S' its exact linearization.
double tcc_sample(const PdeProblem& problem, const ReactionCurve& truth, const ReactionCurve& xi,
                  ObservationMode mode);

/// Perturbation norms are radius * U(0.5, 1]. Passes when every ratio is < 1.
DiagnosticReport tcc_ratio(const PdeProblem& problem, const ReactionCurve& truth, double radius, int samples,
                           std::uint64_t seed, const SobolevSpec& spec, ObservationMode mode = ObservationMode::full);

/// Least-squares slope of log history[k] against log k for k in [k_lo, k_hi].
double fit_rate_slope(const std::vector<double>& history, int k_lo, int k_hi);

}  // namespace rxinv
