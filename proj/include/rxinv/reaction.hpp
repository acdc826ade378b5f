#pragma once

#include "rxinv/grid.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace rxinv {

/// Uniform sampling of the represented state range [u_min, u_max].
class RangeGrid {
 public:
  RangeGrid(int n_r, double u_min, double u_max);

  int size() const { return n_r_; }
  double u_min() const { return u_min_; }
  double u_max() const { return u_max_; }
  double h() const { return h_; }
  double node(int m) const { return u_min_ + m * h_; }

  bool operator==(const RangeGrid&) const = default;

 private:
  int n_r_;
  double u_min_;
  double u_max_;
  double h_;
};

/// The reaction law sampled on a RangeGrid; evaluated by linear interpolation.
struct ReactionCurve {
  RangeGrid grid;
  Eigen::VectorXd samples;

  explicit ReactionCurve(const RangeGrid& g) : grid(g), samples(Eigen::VectorXd::Zero(g.size())) {}
  ReactionCurve(const RangeGrid& g, Eigen::VectorXd s);

  template <class F>
  static ReactionCurve from_function(const RangeGrid& g, F&& f) {
    ReactionCurve c(g);
    for (int m = 0; m < g.size(); ++m) c.samples[m] = f(g.node(m));
    return c;
  }

  // Linear interpolation, clamped outside [u_min, u_max].
  double operator()(double u) const;
  // Slope of the piecewise-linear interpolant (0 in the clamped region).
  double secant_slope(double u) const;
};

/// How the range grid is extended to a periodic signal before the DFT.
///  even:     mirrored about both ends (period 2 n_r h), so Pi(u_min) and Pi(u_max)
///            are not tied to each other.
///  periodic: wrapped as is (period n_r h).
enum class SobolevExtension { even, periodic };

SobolevExtension parse_sobolev_extension(const std::string& name);
std::string to_string(SobolevExtension e);

struct SobolevSpec {
  double s = 1.5;
  SobolevExtension extension = SobolevExtension::even;
};

enum class BuiltinReaction { fisher, lane_emden, zfk, allen_cahn, ginzburg_landau };

BuiltinReaction parse_builtin_reaction(const std::string& name);
std::string to_string(BuiltinReaction r);
std::vector<std::string> builtin_reaction_names();

/// Closed-form law; Allen-Cahn uses a = 0.5, Ginzburg-Landau p = 2.
double builtin_law(BuiltinReaction r, double u);
ReactionCurve builtin_reaction(BuiltinReaction r, const RangeGrid& grid);
ReactionCurve builtin_reaction(const std::string& name, const RangeGrid& grid);

/// Pointwise curve(u(t, x)).
SpaceTimeField evaluate(const ReactionCurve& curve, const SpaceTimeField& u);

/// Central differences inside, second-order one-sided differences at the ends.
ReactionCurve derivative_curve(const ReactionCurve& curve);

/// Angular frequencies of the extended signal in FFT order: 2 pi k / period,
/// k wrapped to [-N/2, N/2], N = n_r (periodic) or 2 n_r (even).
Eigen::VectorXd sobolev_frequencies(const RangeGrid& grid, SobolevExtension e);

/// Multipliers (1 + w_k^2)^{-s} in FFT order.
Eigen::VectorXd sobolev_multipliers(const RangeGrid& grid, const SobolevSpec& spec);

/// Extend, DFT, multiply by (1 + w_k^2)^{-s}, invert, restrict to the range grid.
ReactionCurve sobolev_riesz(const ReactionCurve& raw, const SobolevSpec& spec);

/// Discrete H^s inner product h_r sum_m xi_m (R^{-1} eta)_m, R = sobolev_riesz;
/// reduces to the h_r-weighted l2 product for s = 0.
double sobolev_inner(const ReactionCurve& a, const ReactionCurve& b, const SobolevSpec& spec);
double sobolev_norm(const ReactionCurve& a, const SobolevSpec& spec);

/// Relative l2 distance ||a - b|| / ||b|| over the range nodes.
double relative_error(const ReactionCurve& a, const ReactionCurve& b);

std::vector<std::complex<double>> dft(const Eigen::VectorXd& x);
Eigen::VectorXd inverse_dft_real(std::vector<std::complex<double>> spectrum);

}  // namespace rxinv
