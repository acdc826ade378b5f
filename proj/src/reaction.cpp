#include "rxinv/reaction.hpp"

#include "rxinv/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rxinv {

RangeGrid::RangeGrid(int n_r, double u_min, double u_max) : n_r_(n_r), u_min_(u_min), u_max_(u_max) {
  if (n_r < 2) throw ConfigError("range grid needs at least 2 nodes");
  if (!(u_max > u_min)) throw ConfigError("range grid needs u_max > u_min");
  h_ = (u_max - u_min) / (n_r - 1);
}

ReactionCurve::ReactionCurve(const RangeGrid& g, Eigen::VectorXd s) : grid(g), samples(std::move(s)) {
  if (samples.size() != g.size()) throw StructuralError("reaction curve sample count does not match range grid");
}

double ReactionCurve::operator()(double u) const {
  const int n = grid.size();
  const double t = (u - grid.u_min()) / grid.h();
  if (!(t > 0.0)) return samples[0];
  if (t >= n - 1) return samples[n - 1];
  const int m = std::min(static_cast<int>(t), n - 2);
  const double frac = t - m;
  return samples[m] + frac * (samples[m + 1] - samples[m]);
}

double ReactionCurve::secant_slope(double u) const {
  const int n = grid.size();
  const double t = (u - grid.u_min()) / grid.h();
  if (t < 0.0 || t > n - 1) return 0.0;
  const int m = std::min(static_cast<int>(t), n - 2);
  return (samples[m + 1] - samples[m]) / grid.h();
}

BuiltinReaction parse_builtin_reaction(const std::string& name) {
  if (name == "fisher") return BuiltinReaction::fisher;
  if (name == "lane_emden") return BuiltinReaction::lane_emden;
  if (name == "zfk") return BuiltinReaction::zfk;
  if (name == "allen_cahn") return BuiltinReaction::allen_cahn;
  if (name == "ginzburg_landau") return BuiltinReaction::ginzburg_landau;
  throw ConfigError("unknown reaction '" + name + "'");
}

std::string to_string(BuiltinReaction r) {
  switch (r) {
    case BuiltinReaction::fisher: return "fisher";
    case BuiltinReaction::lane_emden: return "lane_emden";
    case BuiltinReaction::zfk: return "zfk";
    case BuiltinReaction::allen_cahn: return "allen_cahn";
    case BuiltinReaction::ginzburg_landau: return "ginzburg_landau";
  }
  return "unknown";
}

std::vector<std::string> builtin_reaction_names() {
  return {"fisher", "lane_emden", "zfk", "allen_cahn", "ginzburg_landau"};
}

double builtin_law(BuiltinReaction r, double u) {
  switch (r) {
    case BuiltinReaction::fisher: return 4.0 * u * (1.0 - u);
    case BuiltinReaction::lane_emden: return 2.0 * u / (1.0 + u + 4.0 * u * u);
    case BuiltinReaction::zfk: return 4.0 * u * (1.0 - u) * std::exp(-2.0 * (1.0 - u));
    case BuiltinReaction::allen_cahn: return u * (1.0 - u) * (u - 0.5);
    case BuiltinReaction::ginzburg_landau: return -u * std::abs(u) * std::abs(u);
  }
  return 0.0;
}

ReactionCurve builtin_reaction(BuiltinReaction r, const RangeGrid& grid) {
  return ReactionCurve::from_function(grid, [r](double u) { return builtin_law(r, u); });
}

ReactionCurve builtin_reaction(const std::string& name, const RangeGrid& grid) {
  return builtin_reaction(parse_builtin_reaction(name), grid);
}

SpaceTimeField evaluate(const ReactionCurve& curve, const SpaceTimeField& u) {
  SpaceTimeField out(u.time, u.space);
  const auto n = u.values.size();
  const double* in = u.values.data();
  double* dst = out.values.data();
  for (Eigen::Index k = 0; k < n; ++k) dst[k] = curve(in[k]);
  return out;
}

ReactionCurve derivative_curve(const ReactionCurve& curve) {
  const int n = curve.grid.size();
  if (n < 3) throw StructuralError("derivative_curve needs at least 3 range nodes");
  const double h = curve.grid.h();
  const auto& f = curve.samples;
  ReactionCurve d(curve.grid);
  for (int m = 1; m < n - 1; ++m) d.samples[m] = (f[m + 1] - f[m - 1]) / (2.0 * h);
  d.samples[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d.samples[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

std::vector<std::complex<double>> dft(const Eigen::VectorXd& x) {
  Eigen::FFT<double> fft;
  std::vector<double> in(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  return out;
}

Eigen::VectorXd inverse_dft_real(std::vector<std::complex<double>> spectrum) {
  Eigen::FFT<double> fft;
  std::vector<double> out;
  fft.inv(out, spectrum);
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

SobolevExtension parse_sobolev_extension(const std::string& name) {
  if (name == "even") return SobolevExtension::even;
  if (name == "periodic") return SobolevExtension::periodic;
  throw ConfigError("unknown sobolev extension '" + name + "' (expected even or periodic)");
}

std::string to_string(SobolevExtension e) { return e == SobolevExtension::even ? "even" : "periodic"; }

Eigen::VectorXd sobolev_frequencies(const RangeGrid& grid, SobolevExtension e) {
  const int len = e == SobolevExtension::even ? 2 * grid.size() : grid.size();
  const double period = len * grid.h();
  Eigen::VectorXd w(len);
  for (int k = 0; k < len; ++k) {
    const int wrapped = (2 * k <= len) ? k : k - len;
    w[k] = 2.0 * std::numbers::pi * wrapped / period;
  }
  return w;
}

Eigen::VectorXd sobolev_multipliers(const RangeGrid& grid, const SobolevSpec& spec) {
  const Eigen::VectorXd w = sobolev_frequencies(grid, spec.extension);
  return (1.0 + w.array().square()).pow(-spec.s).matrix();
}

namespace {

// Applies the multipliers raised to `power` (1: Riesz map, -1: its inverse).
Eigen::VectorXd apply_multipliers(const ReactionCurve& c, const SobolevSpec& spec, double power) {
  const int n = c.grid.size();
  Eigen::VectorXd ext = c.samples;
  if (spec.extension == SobolevExtension::even) {
    ext.resize(2 * n);
    ext.head(n) = c.samples;
    ext.tail(n) = c.samples.reverse();
  }
  auto spectrum = dft(ext);
  const Eigen::VectorXd mult = sobolev_multipliers(c.grid, spec).array().pow(power).matrix();
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= mult[static_cast<Eigen::Index>(k)];
  return inverse_dft_real(std::move(spectrum)).head(n);
}

}  // namespace

ReactionCurve sobolev_riesz(const ReactionCurve& raw, const SobolevSpec& spec) {
  return ReactionCurve(raw.grid, apply_multipliers(raw, spec, 1.0));
}

double sobolev_inner(const ReactionCurve& a, const ReactionCurve& b, const SobolevSpec& spec) {
  if (!(a.grid == b.grid)) throw StructuralError("curves live on different range grids");
  return a.grid.h() * a.samples.dot(apply_multipliers(b, spec, -1.0));
}

double sobolev_norm(const ReactionCurve& a, const SobolevSpec& spec) {
  return std::sqrt(std::max(0.0, sobolev_inner(a, a, spec)));
}

double relative_error(const ReactionCurve& a, const ReactionCurve& b) {
  if (!(a.grid == b.grid)) throw StructuralError("curves live on different range grids");
  const double denom = b.samples.norm();
  const double num = (a.samples - b.samples).norm();
  return denom > 0.0 ? num / denom : num;
}

}  // namespace rxinv
