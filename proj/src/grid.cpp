#include "rxinv/grid.hpp"

#include "rxinv/errors.hpp"

#include <cmath>
#include <string>

namespace rxinv {

SpaceGrid::SpaceGrid(int n_x, double x_min, double x_max) : n_x_(n_x), x_min_(x_min), x_max_(x_max) {
  if (n_x < 3) throw ConfigError("space grid needs at least 3 nodes, got " + std::to_string(n_x));
  if (!(x_max > x_min)) throw ConfigError("space grid needs x_max > x_min");
  h_ = (x_max - x_min) / (n_x - 1);
}

TimeGrid::TimeGrid(int n_t, double t_final) : n_t_(n_t), t_final_(t_final) {
  if (n_t < 2) throw ConfigError("time grid needs at least 2 nodes, got " + std::to_string(n_t));
  if (!(t_final > 0.0)) throw ConfigError("time grid needs t_final > 0");
  dt_ = t_final / (n_t - 1);
}

SpatialField::SpatialField(const SpaceGrid& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size())
    throw StructuralError("spatial field has " + std::to_string(values.size()) + " values for " +
                          std::to_string(g.size()) + " nodes");
}

SpaceTimeField::SpaceTimeField(const TimeGrid& t, const SpaceGrid& x, RowMatrix v)
    : time(t), space(x), values(std::move(v)) {
  if (values.rows() != t.size() || values.cols() != x.size())
    throw StructuralError("space-time field shape does not match its grids");
}

SpatialField SpaceTimeField::slice(int n) const {
  return SpatialField(space, values.row(n).transpose());
}

void SpaceTimeField::set_slice(int n, const SpatialField& g) {
  if (!(g.grid == space)) throw StructuralError("slice grid does not match field grid");
  values.row(n) = g.values.transpose();
}

void require_same_shape(const SpaceTimeField& a, const SpaceTimeField& b) {
  if (!(a.time == b.time) || !(a.space == b.space))
    throw StructuralError("space-time fields live on different grids");
}

void require_same_shape(const SpatialField& a, const SpatialField& b) {
  if (!(a.grid == b.grid)) throw StructuralError("spatial fields live on different grids");
}

bool all_finite(const SpaceTimeField& f) { return f.values.allFinite(); }

SpatialField trapezoid_time_integral(const SpaceTimeField& f) {
  SpatialField out(f.space);
  for (int n = 0; n < f.time.size(); ++n) out.values += f.time.weight(n) * f.values.row(n).transpose();
  return out;
}

double inner_l2_space(const SpatialField& a, const SpatialField& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (int i = 0; i < a.grid.size(); ++i) sum += a.grid.weight(i) * a.values[i] * b.values[i];
  return sum;
}

double inner_l2_spacetime(const SpaceTimeField& a, const SpaceTimeField& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (int n = 0; n < a.time.size(); ++n) {
    double row = 0.0;
    for (int i = 0; i < a.space.size(); ++i) row += a.space.weight(i) * a.values(n, i) * b.values(n, i);
    sum += a.time.weight(n) * row;
  }
  return sum;
}

double norm_l2_space(const SpatialField& g) { return std::sqrt(inner_l2_space(g, g)); }
double norm_l2_spacetime(const SpaceTimeField& f) { return std::sqrt(inner_l2_spacetime(f, f)); }

}  // namespace rxinv
