#include "rxinv/discrete_ops.hpp"

#include "rxinv/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rxinv {

BandedLU::BandedLU(int n, int bandwidth, const std::function<double(int, int)>& entry)
    : n_(n), p_(bandwidth), band_(static_cast<std::size_t>(n) * (2 * bandwidth + 1), 0.0) {
  double scale = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - p_); j <= std::min(n_ - 1, i + p_); ++j) {
      at(i, j) = entry(i, j);
      scale = std::max(scale, std::abs(at(i, j)));
    }
  for (int k = 0; k < n_; ++k) {
    const double pivot = at(k, k);
    if (!(std::abs(pivot) > 1e-14 * scale)) throw NumericError("banded LU: singular pivot");
    for (int i = k + 1; i <= std::min(n_ - 1, k + p_); ++i) {
      const double l = at(i, k) / pivot;
      at(i, k) = l;
      for (int j = k + 1; j <= std::min(n_ - 1, k + p_); ++j) at(i, j) -= l * at(k, j);
    }
  }
}

void BandedLU::solve_in_place(std::span<double> x) const {
  if (static_cast<int>(x.size()) != n_) throw StructuralError("banded LU: right-hand side has wrong length");
  for (int i = 0; i < n_; ++i) {
    double s = x[i];
    for (int j = std::max(0, i - p_); j < i; ++j) s -= at(i, j) * x[j];
    x[i] = s;
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j <= std::min(n_ - 1, i + p_); ++j) s -= at(i, j) * x[j];
    x[i] = s / at(i, i);
  }
}

namespace {

void check_length(std::span<const double> v, const SpaceGrid& g) {
  if (static_cast<int>(v.size()) != g.size()) throw StructuralError("vector length does not match space grid");
}

// Interior tridiagonal Laplacian entry, interior indices.
double laplacian_entry(int i, int j, double inv_h2) {
  if (i == j) return -2.0 * inv_h2;
  if (std::abs(i - j) == 1) return inv_h2;
  return 0.0;
}

}  // namespace

DirichletLaplacian::DirichletLaplacian(const SpaceGrid& grid) : grid_(grid) {
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  lu_ = BandedLU(grid.interior_size(), 1, [inv_h2](int i, int j) { return laplacian_entry(i, j, inv_h2); });
}

void DirichletLaplacian::apply(std::span<const double> g, std::span<double> out) const {
  check_length(g, grid_);
  check_length(out, grid_);
  const int n = grid_.size();
  const double inv_h2 = 1.0 / (grid_.h() * grid_.h());
  auto val = [&](int i) { return (i == 0 || i == n - 1) ? 0.0 : g[i]; };
  // prev carries g[i-1] so that out may alias g.
  double prev = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    const double gi = val(i);
    const double r = (prev - 2.0 * gi + val(i + 1)) * inv_h2;
    prev = gi;
    out[i] = r;
  }
  out[0] = 0.0;
  out[n - 1] = 0.0;
}

void DirichletLaplacian::solve(std::span<const double> rhs, std::span<double> out) const {
  solve_interior(lu_, rhs, out);
}

SpatialField DirichletLaplacian::apply(const SpatialField& g) const {
  SpatialField out(grid_);
  apply(std::span<const double>(g.values.data(), g.values.size()), {out.values.data(), static_cast<std::size_t>(out.values.size())});
  return out;
}

SpatialField DirichletLaplacian::solve(const SpatialField& rhs) const {
  SpatialField out(grid_);
  solve(std::span<const double>(rhs.values.data(), rhs.values.size()), {out.values.data(), static_cast<std::size_t>(out.values.size())});
  return out;
}

DirichletBiLaplacian::DirichletBiLaplacian(const SpaceGrid& grid) : grid_(grid) {
  const int m = grid.interior_size();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  lu_ = BandedLU(m, 2, [=](int i, int j) {
    double s = 0.0;
    for (int k = std::max(0, std::min(i, j) - 1); k <= std::min(m - 1, std::max(i, j) + 1); ++k)
      s += laplacian_entry(i, k, inv_h2) * laplacian_entry(k, j, inv_h2);
    return s;
  });
}

void DirichletBiLaplacian::solve(std::span<const double> rhs, std::span<double> out) const {
  solve_interior(lu_, rhs, out);
}

SpatialField DirichletBiLaplacian::solve(const SpatialField& rhs) const {
  SpatialField out(grid_);
  solve(std::span<const double>(rhs.values.data(), rhs.values.size()), {out.values.data(), static_cast<std::size_t>(out.values.size())});
  return out;
}

SineBasis::SineBasis(const SpaceGrid& grid) {
  const int m = grid.interior_size();
  const double pi = std::acos(-1.0);
  basis_.resize(m, m);
  eigenvalues_.resize(m);
  const double scale = std::sqrt(2.0 / (m + 1));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) basis_(i, k) = scale * std::sin(pi * (i + 1) * (k + 1) / (m + 1));
  for (int k = 0; k < m; ++k) {
    const double s = std::sin(pi * (k + 1) / (2.0 * (m + 1)));
    eigenvalues_[k] = 4.0 * s * s / (grid.h() * grid.h());
  }
}

BandedLU implicit_step_operator(const SpaceGrid& grid, std::span<const double> a, std::span<const double> c,
                                double dt, bool transpose) {
  check_length(a, grid);
  check_length(c, grid);
  const double k = dt / (grid.h() * grid.h());
  // Interior index i corresponds to node i + 1.
  return BandedLU(grid.interior_size(), 1, [&](int i, int j) {
    if (i == j) return 1.0 + 2.0 * k * a[i + 1] + dt * c[i + 1];
    const int row_node = (transpose ? j : i) + 1;
    return -k * a[row_node];
  });
}

void solve_interior(const BandedLU& lu, std::span<const double> rhs, std::span<double> out) {
  const int n = lu.size() + 2;
  if (static_cast<int>(rhs.size()) != n || static_cast<int>(out.size()) != n)
    throw StructuralError("interior solve: vector length does not match operator");
  if (out.data() != rhs.data()) std::copy(rhs.begin() + 1, rhs.end() - 1, out.begin() + 1);
  lu.solve_in_place(out.subspan(1, n - 2));
  out[0] = 0.0;
  out[n - 1] = 0.0;
}

SpaceTimeField time_derivative(const SpaceTimeField& f) {
  SpaceTimeField out(f.time, f.space);
  const double inv_dt = 1.0 / f.time.dt();
  for (int n = 1; n < f.time.size(); ++n) out.values.row(n) = (f.values.row(n) - f.values.row(n - 1)) * inv_dt;
  out.values.row(0) = out.values.row(1);
  return out;
}

}  // namespace rxinv
