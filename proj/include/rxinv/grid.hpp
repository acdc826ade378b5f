#pragma once

#include <Eigen/Dense>

#include <span>

namespace rxinv {

/// Uniform node set on [x_min, x_max], both boundary nodes included.
class SpaceGrid {
 public:
  SpaceGrid(int n_x, double x_min, double x_max);

  int size() const { return n_x_; }
  int interior_size() const { return n_x_ - 2; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double h() const { return h_; }
  double node(int i) const { return x_min_ + i * h_; }

  // Trapezoid quadrature weight of node i.
  double weight(int i) const { return (i == 0 || i == n_x_ - 1) ? 0.5 * h_ : h_; }

  bool operator==(const SpaceGrid&) const = default;

 private:
  int n_x_;
  double x_min_;
  double x_max_;
  double h_;
};

/// Uniform time nodes t_n = n dt on [0, T].
class TimeGrid {
 public:
  TimeGrid(int n_t, double t_final);

  int size() const { return n_t_; }
  double t_final() const { return t_final_; }
  double dt() const { return dt_; }
  double node(int n) const { return n * dt_; }
  double weight(int n) const { return (n == 0 || n == n_t_ - 1) ? 0.5 * dt_ : dt_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  int n_t_;
  double t_final_;
  double dt_;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Function of x on a SpaceGrid.
struct SpatialField {
  SpaceGrid grid;
  Eigen::VectorXd values;

  explicit SpatialField(const SpaceGrid& g) : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}
  SpatialField(const SpaceGrid& g, Eigen::VectorXd v);

  template <class F>
  static SpatialField from_function(const SpaceGrid& g, F&& f) {
    SpatialField out(g);
    for (int i = 0; i < g.size(); ++i) out.values[i] = f(g.node(i));
    return out;
  }

  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
};

/// Function of (t, x); row n holds the time slice t_n.
struct SpaceTimeField {
  TimeGrid time;
  SpaceGrid space;
  RowMatrix values;

  SpaceTimeField(const TimeGrid& t, const SpaceGrid& x)
      : time(t), space(x), values(RowMatrix::Zero(t.size(), x.size())) {}
  SpaceTimeField(const TimeGrid& t, const SpaceGrid& x, RowMatrix v);

  template <class F>
  static SpaceTimeField from_function(const TimeGrid& t, const SpaceGrid& x, F&& f) {
    SpaceTimeField out(t, x);
    for (int n = 0; n < t.size(); ++n)
      for (int i = 0; i < x.size(); ++i) out.values(n, i) = f(t.node(n), x.node(i));
    return out;
  }

  std::span<double> row(int n) { return {values.row(n).data(), static_cast<std::size_t>(space.size())}; }
  std::span<const double> row(int n) const {
    return {values.row(n).data(), static_cast<std::size_t>(space.size())};
  }
  SpatialField slice(int n) const;
  void set_slice(int n, const SpatialField& g);
};

void require_same_shape(const SpaceTimeField& a, const SpaceTimeField& b);
void require_same_shape(const SpatialField& a, const SpatialField& b);
bool all_finite(const SpaceTimeField& f);

/// Composite trapezoid rule over the time nodes, per spatial node.
SpatialField trapezoid_time_integral(const SpaceTimeField& f);

double norm_l2_space(const SpatialField& g);
double norm_l2_spacetime(const SpaceTimeField& f);
double inner_l2_space(const SpatialField& a, const SpatialField& b);
double inner_l2_spacetime(const SpaceTimeField& a, const SpaceTimeField& b);

}  // namespace rxinv
