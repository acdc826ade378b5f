#pragma once

#include "rxinv/grid.hpp"

#include <functional>
#include <span>
#include <vector>

namespace rxinv {

/// LU factorization (no pivoting) of a square matrix with equal lower and
/// upper bandwidth. Suitable for the diagonally dominant or SPD operators
/// assembled here.
class BandedLU {
 public:
  BandedLU() = default;
  BandedLU(int n, int bandwidth, const std::function<double(int, int)>& entry);

  int size() const { return n_; }
  void solve_in_place(std::span<double> x) const;

 private:
  double& at(int i, int j) { return band_[static_cast<std::size_t>(i) * width() + (j - i + p_)]; }
  double at(int i, int j) const { return band_[static_cast<std::size_t>(i) * width() + (j - i + p_)]; }
  int width() const { return 2 * p_ + 1; }

  int n_ = 0;
  int p_ = 0;
  std::vector<double> band_;
};

/// Central-difference Laplacian with zero Dirichlet values. All vectors are
/// full length n_x; boundary inputs are ignored and boundary outputs are 0.
class DirichletLaplacian {
 public:
  explicit DirichletLaplacian(const SpaceGrid& grid);

  const SpaceGrid& grid() const { return grid_; }

  void apply(std::span<const double> g, std::span<double> out) const;
  void solve(std::span<const double> rhs, std::span<double> out) const;

  SpatialField apply(const SpatialField& g) const;
  SpatialField solve(const SpatialField& rhs) const;

 private:
  SpaceGrid grid_;
  BandedLU lu_;
};

/// Square of the discrete Dirichlet Laplacian (pentadiagonal on interior
/// nodes), so that its inverse is exactly the twice-applied Laplacian inverse.
class DirichletBiLaplacian {
 public:
  explicit DirichletBiLaplacian(const SpaceGrid& grid);

  void solve(std::span<const double> rhs, std::span<double> out) const;
  SpatialField solve(const SpatialField& rhs) const;

 private:
  SpaceGrid grid_;
  BandedLU lu_;
};

/// Orthonormal eigenbasis of the interior Dirichlet Laplacian:
/// -Lap_h = S diag(lambda) S with S symmetric and orthogonal.
class SineBasis {
 public:
  explicit SineBasis(const SpaceGrid& grid);

  int size() const { return static_cast<int>(eigenvalues_.size()); }
  // Eigenvalues of -Lap_h, ascending.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  // Rows of `interior` are interior-node vectors; the transform is its own inverse.
  RowMatrix transform(const RowMatrix& interior) const { return interior * basis_; }

 private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd eigenvalues_;
};

/// Factorizes the interior operator I + dt (-diag(a) Lap + diag(c)), or its
/// transpose I + dt (-Lap diag(a) + diag(c)). `a` and `c` are full length.
BandedLU implicit_step_operator(const SpaceGrid& grid, std::span<const double> a, std::span<const double> c,
                                double dt, bool transpose);

/// Solves with an implicit_step_operator factorization on a full-length vector;
/// boundary entries of the result are zero.
void solve_interior(const BandedLU& lu, std::span<const double> rhs, std::span<double> out);

/// Backward differences (f^n - f^{n-1}) / dt; row 0 copies row 1.
SpaceTimeField time_derivative(const SpaceTimeField& f);

}  // namespace rxinv
