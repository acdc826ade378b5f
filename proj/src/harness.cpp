#include "rxinv/harness.hpp"

#include "rxinv/errors.hpp"

#include <fmt/format.h>

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace rxinv {

using Json = nlohmann::ordered_json;

namespace {

// Strict view of one JSON object: remembers which keys were read so leftovers
// can be reported with their full path.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", path_));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(fmt::format("{}.{}: wrong type ({})", path_, key, j_.at(key).type_name()));
    }
  }

  Reader object(const std::string& key) {
    seen_.insert(key);
    static const Json empty = Json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, path_ + "." + key);
  }

  const Json* raw(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }
  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(fmt::format("{}.{}: unknown key", path_, item.key()));
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs `parse` on a string-valued enum field and prefixes its error with the path.
template <class F>
auto parse_enum(Reader& r, const std::string& key, const std::string& fallback, F&& parse) {
  const std::string value = r.get<std::string>(key, fallback);
  try {
    return parse(value);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", r.field(key), e.what()));
  }
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", field, what));
}

ProfileSpec read_profile(Reader r, const std::string& fallback_kind, const std::set<std::string>& kinds) {
  ProfileSpec p;
  p.kind = r.get<std::string>("kind", fallback_kind);
  if (!kinds.count(p.kind)) {
    std::string allowed;
    for (const auto& k : kinds) allowed += (allowed.empty() ? "" : ", ") + k;
    throw ConfigError(fmt::format("{}: unknown kind '{}' (expected one of {})", r.field("kind"), p.kind, allowed));
  }
  p.amplitude = r.get<double>("amplitude", p.amplitude);
  p.frequency = r.get<double>("frequency", p.frequency);
  p.taper = r.get<double>("taper", p.taper);
  p.values = r.get<std::vector<double>>("values", {});
  require(p.taper > 0.0, r.field("taper"), "must be > 0");
  r.finish();
  return p;
}

Json profile_json(const ProfileSpec& p) {
  Json j{{"kind", p.kind}};
  if (p.kind == "sine") {
    j["amplitude"] = p.amplitude;
    j["frequency"] = p.frequency;
  } else if (p.kind == "ramp") {
    j["amplitude"] = p.amplitude;
    j["taper"] = p.taper;
  } else if (p.kind == "values") {
    j["values"] = p.values;
  }
  return j;
}

StoppingRule read_rule(Reader r, const StoppingRule& fallback) {
  if (!r.has("rule")) {
    r.finish();
    return fallback;
  }
  const std::string kind = r.get<std::string>("rule", "");
  StoppingRule rule;
  if (kind == "fixed_count") {
    rule = FixedCount{r.get<int>("k_max", 1)};
  } else if (kind == "residual_threshold") {
    rule = ResidualThreshold{r.get<double>("tol", 1e-6)};
  } else if (kind == "noise_coupled") {
    rule = NoiseCoupled{0.0, r.get<double>("q", 1.0)};
  } else if (kind == "posterior") {
    rule = Posterior{r.get<double>("c_pos", 1.0)};
  } else if (kind == "discrepancy") {
    rule = Discrepancy{r.get<double>("tau", 1.5), 0.0};
  } else {
    throw ConfigError(fmt::format(
        "{}: unknown rule '{}' (expected fixed_count, residual_threshold, noise_coupled, posterior, discrepancy)",
        r.field("rule"), kind));
  }
  r.finish();
  return rule;
}

Json rule_json(const StoppingRule& rule) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FixedCount>) return {{"rule", "fixed_count"}, {"k_max", v.k_max}};
        if constexpr (std::is_same_v<T, ResidualThreshold>) return {{"rule", "residual_threshold"}, {"tol", v.tol}};
        if constexpr (std::is_same_v<T, NoiseCoupled>) return {{"rule", "noise_coupled"}, {"q", v.q}};
        if constexpr (std::is_same_v<T, Posterior>) return {{"rule", "posterior"}, {"c_pos", v.c_pos}};
        if constexpr (std::is_same_v<T, Discrepancy>) return {{"rule", "discrepancy"}, {"tau", v.tau}};
      },
      rule);
}

StepPolicy read_step(Reader r) {
  StepPolicy s;
  s.safety = r.get<double>("safety", s.safety);
  s.power_iterations = r.get<int>("power_iterations", s.power_iterations);
  s.max_backtracks = r.get<int>("max_backtracks", s.max_backtracks);
  s.backtracking = r.get<bool>("backtracking", s.backtracking);
  r.finish();
  return s;
}

Json step_json(const StepPolicy& s) {
  return {{"safety", s.safety},
          {"power_iterations", s.power_iterations},
          {"max_backtracks", s.max_backtracks},
          {"backtracking", s.backtracking}};
}

InversionConfig read_inversion(Reader r) {
  InversionConfig c;
  c.mode = parse_enum(r, "mode", "sequential", [](const std::string& s) { return parse_inversion_mode(s); });
  {
    Reader s = r.object("sobolev");
    c.sobolev.s = s.get<double>("s", c.sobolev.s);
    c.sobolev.extension =
        parse_enum(s, "extension", "even", [](const std::string& v) { return parse_sobolev_extension(v); });
    require(c.sobolev.s > 1.0, s.field("s"), "must be > 1");
    s.finish();
  }
  c.lower_metric =
      parse_enum(r, "lower_metric", "parabolic", [](const std::string& v) { return parse_lower_metric(v); });
  c.lower_rule = read_rule(r.object("lower_rule"), c.lower_rule);
  c.upper_rule = read_rule(r.object("upper_rule"), c.upper_rule);
  c.lower_step = read_step(r.object("lower_step"));
  c.upper_step = read_step(r.object("upper_step"));
  c.max_upper_iterations = r.get<int>("max_upper_iterations", c.max_upper_iterations);
  c.max_lower_iterations = r.get<int>("max_lower_iterations", c.max_lower_iterations);
  c.snapshot_iterations = r.get<std::vector<int>>("snapshots", {});
  const int every = r.get<int>("snapshot_every", 0);
  require(every >= 0, r.field("snapshot_every"), "must be >= 0");
  if (every > 0)
    for (int j = 0; j <= c.max_upper_iterations; j += every) c.snapshot_iterations.push_back(j);
  std::sort(c.snapshot_iterations.begin(), c.snapshot_iterations.end());
  c.snapshot_iterations.erase(std::unique(c.snapshot_iterations.begin(), c.snapshot_iterations.end()),
                              c.snapshot_iterations.end());
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", r.path(), e.what()));
  }
  r.finish();
  return c;
}

Json inversion_json(const InversionConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"sobolev", {{"s", c.sobolev.s}, {"extension", to_string(c.sobolev.extension)}}},
          {"lower_metric", to_string(c.lower_metric)},
          {"lower_rule", rule_json(c.lower_rule)},
          {"upper_rule", rule_json(c.upper_rule)},
          {"lower_step", step_json(c.lower_step)},
          {"upper_step", step_json(c.upper_step)},
          {"max_upper_iterations", c.max_upper_iterations},
          {"max_lower_iterations", c.max_lower_iterations},
          {"snapshots", c.snapshot_iterations}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json summary_json(const RunSummary& s) {
  Json j{{"name", s.name},
         {"mode", to_string(s.mode)},
         {"success", s.success},
         {"stop_reason", s.stop_reason},
         {"j_stop", s.j_stop},
         {"kappa_sum", s.kappa_sum},
         {"upper_backtracks", s.upper_backtracks},
         {"param_error", {{"initial", s.initial_param_error}, {"final", s.final_param_error}}},
         {"misfit", {{"initial", s.initial_misfit}, {"final", s.final_misfit}}},
         {"state_error", {{"initial", s.initial_state_error}, {"final", s.final_state_error}}},
         {"wall_seconds", s.wall_seconds}};
  j["artifacts"] = s.artifacts;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  Reader r(root, "config");
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.schema = r.get<int>("schema", kConfigSchema);
  require(cfg.schema == kConfigSchema, r.field("schema"), fmt::format("unsupported version (expected {})", kConfigSchema));
  cfg.name = r.get<std::string>("name", cfg.name);
  cfg.reaction = r.get<std::string>("reaction", cfg.reaction);
  cfg.reaction_file = r.get<std::string>("reaction_file", "");
  if (cfg.reaction_file.empty()) {
    try {
      parse_builtin_reaction(cfg.reaction);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", r.field("reaction"), e.what()));
    }
  }
  {
    Reader p = r.object("problem");
    ProblemSpec& s = cfg.problem;
    {
      Reader g = p.object("grid");
      s.nx = g.get<int>("nx", s.nx);
      s.x_min = g.get<double>("x_min", s.x_min);
      s.x_max = g.get<double>("x_max", s.x_max);
      s.nt = g.get<int>("nt", s.nt);
      s.t_final = g.get<double>("t_final", s.t_final);
      require(s.nx >= 5, g.field("nx"), "must be >= 5");
      require(s.x_max > s.x_min, g.field("x_max"), "must exceed x_min");
      require(s.nt >= 2, g.field("nt"), "must be >= 2");
      require(s.t_final > 0.0, g.field("t_final"), "must be > 0");
      g.finish();
    }
    {
      Reader g = p.object("range");
      s.range_n = g.get<int>("n", s.range_n);
      s.u_min = g.get<double>("u_min", s.u_min);
      s.u_max = g.get<double>("u_max", s.u_max);
      require(s.range_n >= 3, g.field("n"), "must be >= 3");
      require(s.u_max > s.u_min, g.field("u_max"), "must exceed u_min");
      g.finish();
    }
    s.a = p.get<double>("a", s.a);
    s.b = p.get<double>("b", s.b);
    require(s.a > 0.0, p.field("a"), "must be > 0");
    s.u0 = read_profile(p.object("u0"), "sine", {"sine", "ramp", "values"});
    s.phi = read_profile(p.object("phi"), "zero", {"zero", "sine", "steady", "sweep"});
    if (s.u0.kind == "values")
      require(static_cast<int>(s.u0.values.size()) == s.nx, p.field("u0.values"),
              fmt::format("needs {} entries", s.nx));
    p.finish();
  }
  {
    Reader d = r.object("data");
    cfg.data.mode = parse_enum(d, "mode", "full", [](const std::string& v) { return parse_observation_mode(v); });
    cfg.data.noise = d.get<double>("noise", cfg.data.noise);
    cfg.data.seed = d.get<std::uint64_t>("seed", cfg.data.seed);
    require(cfg.data.noise >= 0.0, d.field("noise"), "must be >= 0");
    d.finish();
  }
  cfg.inversion = read_inversion(r.object("inversion"));
  cfg.compare_modes = r.get<bool>("compare_modes", false);
  {
    Reader s = r.object("sweep");
    cfg.sweep.deltas = s.get<std::vector<double>>("deltas", cfg.sweep.deltas);
    cfg.sweep.seeds = s.get<int>("seeds", cfg.sweep.seeds);
    cfg.sweep.workers = s.get<int>("workers", cfg.sweep.workers);
    for (double d : cfg.sweep.deltas) require(d >= 0.0, s.field("deltas"), "entries must be >= 0");
    require(cfg.sweep.seeds >= 1, s.field("seeds"), "must be >= 1");
    require(cfg.sweep.workers >= 0, s.field("workers"), "must be >= 0");
    s.finish();
  }
  cfg.output = r.get<std::string>("output", cfg.output);
  r.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string to_json(const ExperimentConfig& cfg) {
  const ProblemSpec& s = cfg.problem;
  Json j{{"schema", cfg.schema}, {"name", cfg.name}, {"reaction", cfg.reaction}};
  if (!cfg.reaction_file.empty()) j["reaction_file"] = cfg.reaction_file;
  j["problem"] = {{"grid", {{"nx", s.nx}, {"x_min", s.x_min}, {"x_max", s.x_max}, {"nt", s.nt}, {"t_final", s.t_final}}},
                  {"range", {{"n", s.range_n}, {"u_min", s.u_min}, {"u_max", s.u_max}}},
                  {"a", s.a},
                  {"b", s.b},
                  {"u0", profile_json(s.u0)},
                  {"phi", profile_json(s.phi)}};
  j["data"] = {{"mode", to_string(cfg.data.mode)}, {"noise", cfg.data.noise}, {"seed", cfg.data.seed}};
  j["inversion"] = inversion_json(cfg.inversion);
  j["compare_modes"] = cfg.compare_modes;
  j["sweep"] = {{"deltas", cfg.sweep.deltas}, {"seeds", cfg.sweep.seeds}, {"workers", cfg.sweep.workers}};
  j["output"] = cfg.output;
  return j.dump(2);
}

InversionConfig effective_inversion(const ExperimentConfig& cfg) {
  InversionConfig c = cfg.inversion;
  auto fill = [&](StoppingRule& rule) {
    if (auto* d = std::get_if<Discrepancy>(&rule)) d->delta = cfg.data.noise;
    if (auto* n = std::get_if<NoiseCoupled>(&rule)) n->delta = cfg.data.noise;
  };
  fill(c.lower_rule);
  fill(c.upper_rule);
  return c;
}

RangeGrid build_range(const ProblemSpec& spec) { return RangeGrid(spec.range_n, spec.u_min, spec.u_max); }

PdeProblem build_problem(const ProblemSpec& spec) {
  const SpaceGrid xs(spec.nx, spec.x_min, spec.x_max);
  const TimeGrid ts(spec.nt, spec.t_final);
  const double pi = std::numbers::pi;
  const double length = spec.x_max - spec.x_min;
  auto xi = [&](double x) { return (x - spec.x_min) / length; };

  SpatialField u0(xs);
  const ProfileSpec& p0 = spec.u0;
  if (p0.kind == "values") {
    u0.values = Eigen::Map<const Eigen::VectorXd>(p0.values.data(), static_cast<Eigen::Index>(p0.values.size()));
  } else {
    u0 = SpatialField::from_function(xs, [&](double x) {
      const double s = xi(x);
      if (p0.kind == "sine") return p0.amplitude * std::sin(p0.frequency * pi * s);
      return -p0.amplitude * std::cos(pi * s) * (1.0 - std::exp(-s / p0.taper)) * (1.0 - std::exp(-(1.0 - s) / p0.taper));
    });
    u0[0] = 0.0;
    u0[spec.nx - 1] = 0.0;
  }

  const SpatialField a = SpatialField::from_function(xs, [&](double) { return spec.a; });
  const SpatialField b = SpatialField::from_function(xs, [&](double) { return spec.b; });
  SpaceTimeField phi(ts, xs);
  const ProfileSpec& pf = spec.phi;
  const DirichletLaplacian lap(xs);
  std::vector<double> lu(spec.nx);
  // -a Lap v + b v on interior nodes.
  auto elliptic = [&](const Eigen::VectorXd& v, int i) { return -spec.a * lu[i] + spec.b * v[i]; };
  if (pf.kind == "sine") {
    phi = SpaceTimeField::from_function(ts, xs, [&](double, double x) { return pf.amplitude * std::sin(pf.frequency * pi * xi(x)); });
  } else if (pf.kind == "steady") {
    lap.apply(std::span<const double>(u0.values.data(), spec.nx), lu);
    for (int n = 0; n < spec.nt; ++n)
      for (int i = 1; i + 1 < spec.nx; ++i) phi.values(n, i) = elliptic(u0.values, i);
  } else if (pf.kind == "sweep") {
    Eigen::VectorXd prev = u0.values;
    for (int n = 0; n < spec.nt; ++n) {
      const Eigen::VectorXd cur = std::cos(pi * ts.node(n) / spec.t_final) * u0.values;
      lap.apply(std::span<const double>(cur.data(), spec.nx), lu);
      for (int i = 1; i + 1 < spec.nx; ++i)
        phi.values(n, i) = (n > 0 ? (cur[i] - prev[i]) / ts.dt() : 0.0) + elliptic(cur, i);
      prev = cur;
    }
  }
  for (int n = 0; n < spec.nt; ++n) phi.values(n, 0) = phi.values(n, spec.nx - 1) = 0.0;
  return PdeProblem(a, b, std::move(phi), std::move(u0));
}

ReactionCurve build_truth(const ExperimentConfig& cfg) {
  const RangeGrid grid = build_range(cfg.problem);
  if (cfg.reaction_file.empty()) return builtin_reaction(cfg.reaction, grid);

  const std::filesystem::path path = cfg.base_dir / cfg.reaction_file;
  std::ifstream in(path);
  if (!in) throw ConfigError("config.reaction_file: cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config.reaction_file: invalid JSON: " + std::string(e.what()));
  }
  std::vector<double> us, vs;
  try {
    for (const auto& item : j) {
      us.push_back(item.at("u").get<double>());
      vs.push_back(item.at("value").get<double>());
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config.reaction_file: expected an array of {u, value}");
  }
  if (us.size() < 2 || !std::is_sorted(us.begin(), us.end()) ||
      std::adjacent_find(us.begin(), us.end()) != us.end())
    throw ConfigError("config.reaction_file: need at least 2 points with strictly increasing u");
  // Linear interpolation onto the range grid, clamped at the ends.
  ReactionCurve c(grid);
  for (int m = 0; m < grid.size(); ++m) {
    const double u = grid.node(m);
    const auto it = std::upper_bound(us.begin(), us.end(), u);
    if (it == us.begin()) c.samples[m] = vs.front();
    else if (it == us.end()) c.samples[m] = vs.back();
    else {
      const std::size_t k = static_cast<std::size_t>(it - us.begin());
      const double f = (u - us[k - 1]) / (us[k] - us[k - 1]);
      c.samples[m] = vs[k - 1] + f * (vs[k] - vs[k - 1]);
    }
  }
  return c;
}

void write_curve_json(const ReactionCurve& curve, const std::filesystem::path& path) {
  Json j = Json::array();
  for (int m = 0; m < curve.grid.size(); ++m) j.push_back({{"u", curve.grid.node(m)}, {"value", curve.samples[m]}});
  write_text(path, j.dump(2) + "\n");
}

namespace {

struct Prepared {
  PdeProblem problem;
  ReactionCurve truth;
  SpaceTimeField truth_state;
  Observation data;
};

Prepared prepare(const ExperimentConfig& cfg) {
  PdeProblem problem = build_problem(cfg.problem);
  ReactionCurve truth = build_truth(cfg);
  SpaceTimeField state = reference_solve(problem, truth);
  Observation data = add_noise(observe(state, cfg.data.mode), cfg.data.noise, cfg.data.seed);
  return {std::move(problem), std::move(truth), std::move(state), std::move(data)};
}

RunSummary execute(const ExperimentConfig& cfg, const Prepared& prep, InversionMode mode,
                   const std::filesystem::path& out_dir, const RunOptions& options) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  InversionConfig inv = effective_inversion(cfg);
  inv.mode = mode;
  const ReactionCurve init(prep.truth.grid);

  RunSummary s;
  s.name = cfg.name;
  s.mode = mode;
  s.initial_param_error = relative_error(init, prep.truth);
  const SpaceTimeField zero(prep.problem.time(), prep.problem.space());
  s.initial_misfit = observation_residual(prep.data, zero).norm();

  RunLog log;
  ReactionCurve final_curve = init;
  std::optional<SpaceTimeField> final_state;
  try {
    InversionResult res = run_inversion(prep.problem, init, prep.data, inv, Truth{prep.truth, prep.truth_state});
    log = std::move(res.log);
    final_curve = std::move(res.curve);
    final_state = std::move(res.final_state);
  } catch (const InversionFailure& e) {
    log = e.log();
    final_curve = e.last_curve();
    s.success = false;
  } catch (const NumericError& e) {
    log.stop_reason = std::string("failure: ") + e.what();
    s.success = false;
  }

  s.stop_reason = log.stop_reason;
  s.kappa_sum = log.kappa_sum();
  s.upper_backtracks = log.upper_backtracks;
  s.final_param_error = relative_error(final_curve, prep.truth);
  if (!log.records.empty()) {
    const RunRecord& first = log.records.front();
    const RunRecord& last = log.records.back();
    s.j_stop = last.j;
    s.final_misfit = last.misfit;
    s.initial_state_error = first.state_error;
    s.final_state_error = last.state_error;
  }

  {
    std::ofstream csv(out_dir / "run_log.csv", std::ios::binary);
    write_run_log_csv(log, csv, options.timing);
    s.artifacts["run_log"] = (out_dir / "run_log.csv").string();
  }
  write_curve_json(init, out_dir / "reaction_init.json");
  write_curve_json(final_curve, out_dir / "reaction_final.json");
  write_curve_json(prep.truth, out_dir / "reaction_truth.json");
  s.artifacts["reaction_init"] = (out_dir / "reaction_init.json").string();
  s.artifacts["reaction_final"] = (out_dir / "reaction_final.json").string();
  s.artifacts["reaction_truth"] = (out_dir / "reaction_truth.json").string();
  if (!log.snapshots.empty() || final_state) {
    const fs::path snap_dir = out_dir / "snapshots";
    fs::create_directories(snap_dir);
    auto dump = [&](const SpaceTimeField& u, const std::string& file) {
      std::ofstream f(snap_dir / file, std::ios::binary);
      write_observation_csv(observe(u, ObservationMode::full), f);
    };
    for (const auto& [j, u] : log.snapshots) dump(u, fmt::format("state_j{:05d}.csv", j));
    for (const auto& [j, c] : log.curve_snapshots) write_curve_json(c, snap_dir / fmt::format("reaction_j{:05d}.json", j));
    dump(prep.truth_state, "state_truth.csv");
    if (final_state) dump(*final_state, "state_final.csv");
    s.artifacts["snapshots"] = snap_dir.string();
  }
  s.wall_seconds = elapsed_seconds(t0);
  s.artifacts["summary"] = (out_dir / "summary.json").string();
  Json j = summary_json(s);
  j["config"] = Json::parse(to_json(cfg));
  write_text(out_dir / "summary.json", j.dump(2) + "\n");
  return s;
}

}  // namespace

DiagnosticKind parse_diagnostic_kind(const std::string& name) {
  if (name == "adjoint") return DiagnosticKind::adjoint;
  if (name == "gradient") return DiagnosticKind::gradient;
  if (name == "tcc") return DiagnosticKind::tcc;
  if (name == "rate") return DiagnosticKind::rate;
  throw ConfigError("unknown diagnostic '" + name + "' (expected adjoint, gradient, tcc, rate)");
}

std::string to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::adjoint: return "adjoint";
    case DiagnosticKind::gradient: return "gradient";
    case DiagnosticKind::tcc: return "tcc";
    case DiagnosticKind::rate: return "rate";
  }
  return "?";
}

DiagnosticReport run_diagnostic(const ExperimentConfig& cfg, DiagnosticKind kind, const DiagnosticOptions& options) {
  const PdeProblem problem = build_problem(cfg.problem);
  const ReactionCurve truth = build_truth(cfg);
  const InversionConfig inv = effective_inversion(cfg);
  switch (kind) {
    case DiagnosticKind::adjoint: {
      const SpaceTimeField u = reference_solve(problem, truth);
      return adjoint_test(problem, truth, u, options.adjoint_trials, options.seed, inv.lower_metric);
    }
    case DiagnosticKind::gradient: {
      const Prepared prep = prepare(cfg);
      return gradient_check(problem, ReactionCurve(truth.grid), prep.data, options.gradient_directions,
                            options.gradient_taus, inv.sobolev, options.seed);
    }
    case DiagnosticKind::tcc:
      return tcc_ratio(problem, truth, options.tcc_radius, options.tcc_samples, options.seed, inv.sobolev,
                       cfg.data.mode);
    case DiagnosticKind::rate: {
      StepPolicy step = inv.lower_step;
      const SpaceTimeField zero(problem.time(), problem.space());
      LowerContext ctx;
      ctx.metric = inv.lower_metric;
      const LowerState out = lower_run(problem, truth, zero, FixedCount{options.rate_k_hi}, step, ctx);
      const double slope = fit_rate_slope(out.history, options.rate_k_lo, options.rate_k_hi);
      DiagnosticReport r{"rate", options.rate_slope_max, slope, slope <= options.rate_slope_max, {}};
      r.samples.push_back({fmt::format("slope over k in [{}, {}]", options.rate_k_lo, options.rate_k_hi), slope});
      return r;
    }
  }
  throw StructuralError("unhandled diagnostic");
}

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  const Prepared prep = prepare(cfg);
  return execute(cfg, prep, cfg.inversion.mode, cfg.output, options);
}

std::vector<RunSummary> run_comparison(const ExperimentConfig& cfg, const RunOptions& options) {
  namespace fs = std::filesystem;
  const Prepared prep = prepare(cfg);
  std::vector<RunSummary> out;
  for (InversionMode m : {InversionMode::standard, InversionMode::sequential})
    out.push_back(execute(cfg, prep, m, fs::path(cfg.output) / to_string(m), options));
  Json j = Json::object();
  for (const auto& s : out)
    j[to_string(s.mode)] = {{"kappa_sum", s.kappa_sum},
                            {"j_stop", s.j_stop},
                            {"final_param_error", s.final_param_error},
                            {"final_misfit", s.final_misfit}};
  write_text(fs::path(cfg.output) / "comparison.json", j.dump(2) + "\n");
  return out;
}

SweepResult run_noise_sweep(const ExperimentConfig& cfg, const RunOptions& options) {
  namespace fs = std::filesystem;
  struct Job {
    double delta;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double d : cfg.sweep.deltas)
    for (int s = 0; s < cfg.sweep.seeds; ++s) jobs.push_back({d, cfg.data.seed + static_cast<std::uint64_t>(s)});

  std::vector<SweepRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        ExperimentConfig c = cfg;
        c.data.noise = jobs[k].delta;
        c.data.seed = jobs[k].seed;
        c.output = (fs::path(cfg.output) / "runs" / fmt::format("delta_{}_seed_{}", jobs[k].delta, jobs[k].seed)).string();
        const RunSummary s = run_experiment(c, options);
        rows[k] = {jobs[k].delta, jobs[k].seed, s.j_stop, s.final_param_error, s.final_misfit, s.success};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers =
      std::min<std::size_t>(jobs.size(), cfg.sweep.workers > 0 ? static_cast<unsigned>(cfg.sweep.workers) : hw);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  SweepResult result;
  result.rows = rows;
  // The delta list is read in the given order; "nonincreasing" is judged from
  // the largest delta to the smallest.
  std::vector<std::size_t> order(cfg.sweep.deltas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.sweep.deltas[a] > cfg.sweep.deltas[b]; });
  int votes = 0;
  for (int s = 0; s < cfg.sweep.seeds; ++s) {
    bool ok = true;
    for (std::size_t i = 1; i < order.size(); ++i) {
      const double coarse = rows[order[i - 1] * cfg.sweep.seeds + s].param_error;
      const double fine = rows[order[i] * cfg.sweep.seeds + s].param_error;
      if (fine > coarse) ok = false;
    }
    result.seed_monotone.push_back(ok);
    votes += ok;
  }
  result.majority_monotone = 2 * votes > cfg.sweep.seeds;

  fs::create_directories(cfg.output);
  std::ostringstream csv;
  csv << "delta,j_stop,param_error,misfit\n";
  for (const auto& r : rows) csv << fmt::format("{:.17g},{},{:.17g},{:.17g}\n", r.delta, r.j_stop, r.param_error, r.misfit);
  write_text(fs::path(cfg.output) / "noise_sweep.csv", csv.str());

  Json j{{"deltas", cfg.sweep.deltas}, {"seeds", Json::array()}, {"majority_nonincreasing", result.majority_monotone}};
  for (int s = 0; s < cfg.sweep.seeds; ++s)
    j["seeds"].push_back({{"seed", cfg.data.seed + static_cast<std::uint64_t>(s)},
                          {"nonincreasing", static_cast<bool>(result.seed_monotone[static_cast<std::size_t>(s)])}});
  write_text(fs::path(cfg.output) / "sweep_summary.json", j.dump(2) + "\n");
  return result;
}

}  // namespace rxinv
