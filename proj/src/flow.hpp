#pragma once

// Adaptive Dormand-Prince 5(4) integration of the geodesic system, optionally
// co-integrating the variational (Jacobi) equation. Shared by the geodesic,
// Jacobi and probe modules.

#include <span>
#include <vector>

#include "geolift/geodesic.hpp"

namespace geolift::detail {

struct FlowState {
  double t = 0.0;
  Vector x;  ///< sheet coordinates, periodic coordinates unwrapped
  Vector u;
  Matrix X;  ///< d x / d v, empty when variations are not tracked
  Matrix U;  ///< d u / d v
  int sheet = 0;
  int orientation = 1;  ///< product of signs of chart-switch Jacobians

  bool tracks_variation() const { return X.size() > 0; }
};

struct FlowRun {
  std::vector<FlowState> states;  ///< accepted states; states.front() is the initial state
  Termination termination = Termination::reached_target;
};

class GeodesicFlow {
 public:
  GeodesicFlow(const ManifoldSpec& M, const IntegratorOptions& opts, bool variational);

  FlowState initial(const Point& p, const Vector& v) const;
  FlowRun run(const FlowState& start, double t_max, std::span<const double> t_eval = {}) const;

  /// Single uncontrolled step from s by h, staying in the sheet of s.
  FlowState step(const FlowState& s, double h) const;
  /// State at parameter t, re-stepped from the last accepted state with
  /// s.t <= t. Requires t within the run.
  FlowState at(const FlowRun& run, double t) const;

  Point primary_point(const FlowState& s) const;
  Vector primary_velocity(const FlowState& s) const;
  Matrix primary_variation(const FlowState& s) const;
  /// Chart determinant of X made frame-consistent across sheets and
  /// normalised by the h-volume at the base point.
  double frame_det(const FlowState& s, const Point& base) const;

  const ManifoldSpec& manifold() const { return M_; }

 private:
  using State = Vector;
  State pack(const FlowState& s) const;
  void unpack(const State& y, FlowState& s) const;
  State rhs(const State& y) const;
  State rk_step(const State& y, const State& k1, double h, State& err, State& k7) const;
  double error_norm(const State& y0, const State& y1, const State& err) const;
  /// Returns theta in (0, 1] of the first domain violation inside the step, or a negative value.
  double first_violation(const FlowState& s0, const FlowState& s1, double h) const;
  bool violates(const FlowState& s) const;
  void maybe_switch_chart(FlowState& s) const;
  Point hermite(const FlowState& a, const FlowState& b, double h, double theta) const;

  const ManifoldSpec& M_;
  IntegratorOptions opts_;
  bool variational_;
  int m_;
};

GeodesicPath to_path(const GeodesicFlow& flow, const FlowRun& run, const Point& p, const Vector& v);

}  // namespace geolift::detail
