#pragma once

#include "rxinv/discrete_ops.hpp"
#include "rxinv/grid.hpp"
#include "rxinv/reaction.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>

namespace rxinv {

/// Factorizations shared by every solve on one space grid.
struct GridOperators {
  explicit GridOperators(const SpaceGrid& grid) : laplacian(grid), bilaplacian(grid), sine(grid) {}
  DirichletLaplacian laplacian;
  DirichletBiLaplacian bilaplacian;
  SineBasis sine;
};

/// u_t - a u_xx + b u + Pi(u) = phi on (0, T) x Omega, u(0) = u0, u = 0 on the
/// boundary. The diffusion term is discretized as a(x) * Lap_h u.
class PdeProblem {
 public:
  PdeProblem(SpatialField a, SpatialField b, SpaceTimeField phi, SpatialField u0);

  const SpaceGrid& space() const { return u0_.grid; }
  const TimeGrid& time() const { return phi_.time; }
  const SpatialField& a() const { return a_; }
  const SpatialField& b() const { return b_; }
  const SpaceTimeField& phi() const { return phi_; }
  const SpatialField& u0() const { return u0_; }
  const GridOperators& ops() const { return *ops_; }

  PdeProblem with_phi(SpaceTimeField phi) const;
  PdeProblem with_u0(SpatialField u0) const;

 private:
  SpatialField a_;
  SpatialField b_;
  SpaceTimeField phi_;
  SpatialField u0_;
  std::shared_ptr<const GridOperators> ops_;
};

/// (pde, init) components of the residual map. Only rows 1.. of pde are used.
struct ResidualPair {
  SpaceTimeField pde;
  SpatialField init;

  explicit ResidualPair(const PdeProblem& p) : pde(p.time(), p.space()), init(p.space()) {}
  ResidualPair(SpaceTimeField pde_part, SpatialField init_part)
      : pde(std::move(pde_part)), init(std::move(init_part)) {}
};

enum class ObservationMode { full, terminal };

ObservationMode parse_observation_mode(const std::string& s);
std::string to_string(ObservationMode m);

struct Observation {
  ObservationMode mode = ObservationMode::full;
  std::variant<SpaceTimeField, SpatialField> data;
  double noise_level = 0.0;

  const SpaceTimeField& full() const { return std::get<SpaceTimeField>(data); }
  const SpatialField& terminal() const { return std::get<SpatialField>(data); }
  double norm() const;
};

/// F(Pi, u): backward-Euler residual on interior nodes plus u(0) - u0.
ResidualPair pde_residual(const PdeProblem& problem, const ReactionCurve& curve, const SpaceTimeField& u);

/// Semi-implicit Euler (implicit diffusion, explicit b u and Pi(u)); used to
/// manufacture synthetic data.
SpaceTimeField reference_solve(const PdeProblem& problem, const ReactionCurve& curve);

/// Exact root of pde_residual via Newton's method in every time step: the
/// discrete parameter-to-state map that the lower level converges to.
SpaceTimeField implicit_solve(const PdeProblem& problem, const ReactionCurve& curve);

Observation observe(const SpaceTimeField& u, ObservationMode mode);

/// Adds seeded Gaussian noise on interior nodes, rescaled so that
/// ||y_delta - y|| = delta ||y|| exactly.
Observation add_noise(const Observation& obs, double delta, std::uint64_t seed);

/// L u - y with the data inner product of the observation mode.
Observation observation_residual(const Observation& obs, const SpaceTimeField& u);

void write_observation_csv(const Observation& obs, std::ostream& out);

}  // namespace rxinv
