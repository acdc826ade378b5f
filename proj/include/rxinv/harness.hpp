#pragma once

#include "rxinv/diagnostics.hpp"
#include "rxinv/upper_level.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rxinv {

inline constexpr int kConfigSchema = 1;

/// A named profile in x (u0) or (t, x) (phi).
///  u0:  sine   A sin(k pi xi), xi = (x - x_min) / (x_max - x_min)
///       ramp   -A cos(pi xi) (1 - e^{-xi/eps}) (1 - e^{-(1-xi)/eps})
///       values explicit nodal values
///  phi: zero
///       sine   A sin(k pi xi), constant in time
///       steady -a Lap_h u0 + b u0, which keeps u0 at rest when Pi = 0
///       sweep  the discrete source under which cos(pi t / T) u0 solves the
///              scheme exactly when Pi = 0, so every node sweeps [-u0, u0]
struct ProfileSpec {
  std::string kind;
  double amplitude = 1.0;
  double frequency = 1.0;
  double taper = 0.03;
  std::vector<double> values{};
};

struct ProblemSpec {
  int nx = 101;
  double x_min = 0.0;
  double x_max = 1.0;
  int nt = 51;
  double t_final = 0.1;
  int range_n = 50;
  double u_min = -1.0;
  double u_max = 1.0;
  double a = 1.0;
  double b = 0.0;
  ProfileSpec u0{.kind = "sine"};
  ProfileSpec phi{.kind = "zero"};
};

struct DataSpec {
  ObservationMode mode = ObservationMode::full;
  double noise = 0.0;
  std::uint64_t seed = 1;
};

struct SweepSpec {
  std::vector<double> deltas{0.04, 0.02, 0.01};
  int seeds = 3;
  // 0 means one per hardware thread.
  int workers = 0;
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::string name = "experiment";
  // Builtin reaction name; ignored when reaction_file is set.
  std::string reaction = "fisher";
  // JSON array of {u, value}, resolved against the config's directory.
  std::string reaction_file;
  ProblemSpec problem;
  DataSpec data;
  // Noise-dependent rules (discrepancy, noise_coupled) take delta from data.
  InversionConfig inversion;
  bool compare_modes = false;
  SweepSpec sweep;
  std::string output = "out";
  std::filesystem::path base_dir;
};

/// Parses and validates; unknown keys, bad enums and out-of-range values raise
/// ConfigError naming the field path.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& cfg);

/// The inversion settings with delta filled in from the data spec.
InversionConfig effective_inversion(const ExperimentConfig& cfg);

RangeGrid build_range(const ProblemSpec& spec);
PdeProblem build_problem(const ProblemSpec& spec);
ReactionCurve build_truth(const ExperimentConfig& cfg);

struct RunSummary {
  std::string name;
  InversionMode mode = InversionMode::sequential;
  bool success = true;
  std::string stop_reason;
  int j_stop = 0;
  long kappa_sum = 0;
  int upper_backtracks = 0;
  double initial_param_error = 0.0;
  double final_param_error = 0.0;
  double initial_misfit = 0.0;
  double final_misfit = 0.0;
  double initial_state_error = 0.0;
  double final_state_error = 0.0;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> artifacts;
};

struct RunOptions {
  bool timing = false;
};

/// Generates data with reference_solve, inverts, and writes run_log.csv,
/// reaction_{init,final,truth}.json, snapshots/ and summary.json under
/// cfg.output. An inversion failure is reported with success = false after the
/// last accepted curve has been written.
RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Runs standard and sequential on the same data into cfg.output/{standard,
/// sequential} and writes comparison.json.
std::vector<RunSummary> run_comparison(const ExperimentConfig& cfg, const RunOptions& options = {});

struct SweepRow {
  double delta = 0.0;
  std::uint64_t seed = 0;
  int j_stop = 0;
  double param_error = 0.0;
  double misfit = 0.0;
  bool success = true;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  // Per seed: error at stop nonincreasing as delta decreases.
  std::vector<bool> seed_monotone;
  bool majority_monotone = false;
};

/// One run per (delta, seed) on a bounded worker pool; rows are ordered by the
/// delta list, then seed. Writes noise_sweep.csv (delta,j_stop,param_error,misfit)
/// and sweep_summary.json under cfg.output.
SweepResult run_noise_sweep(const ExperimentConfig& cfg, const RunOptions& options = {});

enum class DiagnosticKind { adjoint, gradient, tcc, rate };

DiagnosticKind parse_diagnostic_kind(const std::string& name);
std::string to_string(DiagnosticKind kind);

struct DiagnosticOptions {
  std::uint64_t seed = 1;
  int adjoint_trials = 20;
  int gradient_directions = 5;
  std::vector<double> gradient_taus{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double tcc_radius = 0.1;
  int tcc_samples = 20;
  int rate_k_lo = 10;
  int rate_k_hi = 200;
  double rate_slope_max = -0.25;
};

/// Diagnostics on the config's problem and truth:
///  adjoint   dot-product test of the lower adjoint at (Pi_true, u_true)
///  gradient  upper gradient at the zero curve against central differences,
///            with data generated as in run_experiment
///  tcc       tangential cone ratios around Pi_true
///  rate      lower Landweber for Pi_true from zero; the single sample is the
///            fitted log-log slope of the residual over [k_lo, k_hi]
DiagnosticReport run_diagnostic(const ExperimentConfig& cfg, DiagnosticKind kind,
                                const DiagnosticOptions& options = {});

void write_curve_json(const ReactionCurve& curve, const std::filesystem::path& path);

}  // namespace rxinv
