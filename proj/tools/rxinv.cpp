// Command-line front end: run, diag, sweep.

#include "rxinv/errors.hpp"
#include "rxinv/harness.hpp"

#include <fmt/format.h>

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string data;
  std::string reaction;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Noise seed");
  cmd->add_option("--mode", o.mode, "Inversion mode")->check(CLI::IsMember({"standard", "sequential"}));
  cmd->add_option("--data", o.data, "Observation mode")->check(CLI::IsMember({"full", "terminal"}));
  cmd->add_option("--reaction", o.reaction, "Builtin reaction name");
}

rxinv::ExperimentConfig load(const std::string& path, const Overrides& o) {
  rxinv::ExperimentConfig cfg = rxinv::load_config(path);
  if (!o.out.empty()) cfg.output = o.out;
  if (o.seed) cfg.data.seed = *o.seed;
  if (!o.mode.empty()) cfg.inversion.mode = rxinv::parse_inversion_mode(o.mode);
  if (!o.data.empty()) cfg.data.mode = rxinv::parse_observation_mode(o.data);
  if (!o.reaction.empty()) {
    rxinv::parse_builtin_reaction(o.reaction);
    cfg.reaction = o.reaction;
    cfg.reaction_file.clear();
  }
  return cfg;
}

void print_summary(const rxinv::RunSummary& s) {
  fmt::print("{} [{}]: {} after j = {} ({})\n", s.name, rxinv::to_string(s.mode), s.success ? "done" : "FAILED",
             s.j_stop, s.stop_reason);
  fmt::print("  param error {:.4e} -> {:.4e}, misfit {:.4e} -> {:.4e}, sum kappa {}, {:.1f} s\n",
             s.initial_param_error, s.final_param_error, s.initial_misfit, s.final_misfit, s.kappa_sum,
             s.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-law identification by bi-level Landweber"};
  app.require_subcommand(1);

  Overrides run_o, diag_o, sweep_o;
  std::string run_path, diag_path, sweep_path, diag_kind;
  bool timing = false;
  rxinv::DiagnosticOptions diag_opts;
  std::vector<double> noise;

  auto* run = app.add_subcommand("run", "Generate data and invert");
  run->add_option("config", run_path, "Experiment config (JSON)")->required();
  run->add_flag("--timing", timing, "Fill the wall_ms column of run_log.csv");
  add_overrides(run, run_o);

  auto* diag = app.add_subcommand("diag", "Run a diagnostic; exit 0 iff it passes");
  diag->add_option("kind", diag_kind, "adjoint | gradient | tcc | rate")
      ->required()
      ->check(CLI::IsMember({"adjoint", "gradient", "tcc", "rate"}));
  diag->add_option("config", diag_path, "Experiment config (JSON)")->required();
  diag->add_option("--radius", diag_opts.tcc_radius, "tcc perturbation radius in X");
  diag->add_option("--samples", diag_opts.tcc_samples, "tcc sample count");
  diag->add_option("--trials", diag_opts.adjoint_trials, "adjoint trial count");
  diag->add_option("--directions", diag_opts.gradient_directions, "gradient direction count");
  add_overrides(diag, diag_o);

  auto* sweep = app.add_subcommand("sweep", "Noise sweep: error at stop against delta");
  sweep->add_option("--noise", noise, "Noise levels")->delimiter(',');
  sweep->add_option("config", sweep_path, "Experiment config (JSON)")->required();
  add_overrides(sweep, sweep_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      const rxinv::ExperimentConfig cfg = load(run_path, run_o);
      bool ok = true;
      if (cfg.compare_modes) {
        for (const auto& s : rxinv::run_comparison(cfg, {timing})) {
          print_summary(s);
          ok = ok && s.success;
        }
      } else {
        const rxinv::RunSummary s = rxinv::run_experiment(cfg, {timing});
        print_summary(s);
        ok = s.success;
      }
      return ok ? kExitOk : kExitFailure;
    }
    if (diag->parsed()) {
      const rxinv::ExperimentConfig cfg = load(diag_path, diag_o);
      if (diag_o.seed) diag_opts.seed = *diag_o.seed;
      const rxinv::DiagnosticReport r = rxinv::run_diagnostic(cfg, rxinv::parse_diagnostic_kind(diag_kind), diag_opts);
      const std::string text = rxinv::to_json(r);
      std::cout << text << '\n';
      if (!diag_o.out.empty()) {
        std::filesystem::create_directories(diag_o.out);
        std::ofstream(std::filesystem::path(diag_o.out) / fmt::format("diag_{}.json", diag_kind)) << text << '\n';
      }
      return r.pass ? kExitOk : kExitFailure;
    }
    rxinv::ExperimentConfig cfg = load(sweep_path, sweep_o);
    if (!noise.empty()) cfg.sweep.deltas = noise;
    for (double d : cfg.sweep.deltas)
      if (d < 0.0) throw rxinv::ConfigError("--noise: entries must be >= 0");
    const rxinv::SweepResult res = rxinv::run_noise_sweep(cfg);
    for (const auto& row : res.rows)
      fmt::print("delta {:.4g} seed {}: j_stop {}, param error {:.4e}{}\n", row.delta, row.seed, row.j_stop,
                 row.param_error, row.success ? "" : " (failed)");
    fmt::print("error nonincreasing in delta for the majority of seeds: {}\n", res.majority_monotone ? "yes" : "no");
    return res.majority_monotone ? kExitOk : kExitFailure;
  } catch (const rxinv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
