#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geolift/lifting.hpp"

namespace geolift {

enum class SeedStrategy {
  straight,   ///< chart segment, bent through one waypoint around excisions
  waypoints,  ///< user polyline p -> waypoints -> q
  shells,     ///< one seed per region between consecutive conjugate shells
};

std::string to_string(SeedStrategy s);
SeedStrategy seed_strategy_from_string(const std::string& s);

struct ConnectOptions {
  LiftOptions lift;
  double dedup_tol = 1e-5;
  int bend_retries = 8;
  /// Bend offsets are bend_scale * |q - p| * (1, 1, 2, 2, ...) with alternating sign.
  double bend_scale = 0.05;
  /// Largest |v|_h kept by the shells strategy.
  double velocity_budget = 13.0;
  int shell_samples = 800;
  /// Keep only solutions of this causal character.
  std::optional<PathCharacter> character_filter;
};

struct Solution {
  TangentVector v;
  int class_label = 0;
  std::optional<CausalCharacter> character;
  double h_norm = 0.0;
};

struct ConnectAttempt {
  int class_label = 0;
  std::string seed;
  std::vector<Point> nodes;
  LiftResult lift;
};

struct ConnectionResult {
  Point p, q;
  std::vector<Solution> solutions;
  std::vector<ConnectAttempt> diagnostics;
  /// Class range actually enumerated; the enumeration is truncated there.
  int class_budget = 0;
};

/// Lifts seed paths from p to q starting at v0 (default 0_p). waypoints are
/// only used by SeedStrategy::waypoints.
ConnectionResult connect(const ManifoldSpec& M, const Point& p, const Point& q, SeedStrategy strategy,
                         const ConnectOptions& opts = {}, const std::vector<Point>& waypoints = {},
                         const std::optional<Vector>& v0 = std::nullopt);

/// Builds a timelike seed from p to q (the chart segment when it is timelike
/// and inside M, otherwise a two-leg path through `waypoint` or through an
/// automatically bent waypoint) and lifts it with causal_lift. Throws
/// PreconditionError("q not in I(p) ...") when no timelike seed is found.
ConnectionResult connect_causal(const ManifoldSpec& M, const Point& p, const Point& q, const ConnectOptions& opts = {},
                                const std::optional<Point>& waypoint = std::nullopt);

/// One seed per homotopy class k in [-class_budget, class_budget] on
/// manifolds with a deck generator; conjugate shells on sphere-like entries.
/// Manifolds filling a simply connected chart get the single straight class.
ConnectionResult enumerate_multiplicity(const ManifoldSpec& M, const Point& p, const Point& q, int class_budget,
                                        const ConnectOptions& opts = {});

struct HomotopyGrid {
  Point p;
  std::vector<double> s, t;
  /// x[i][j] = exp_p(Hbar(s_i, t_j)); xdot the t-derivative.
  std::vector<std::vector<Point>> x;
  std::vector<std::vector<Vector>> xdot;
  std::vector<std::vector<double>> g;
  std::vector<double> slice_max_g;
  std::vector<bool> slice_timelike;
  double endpoint_error = 0.0;
  bool all_timelike = true;
};

/// Hbar(s, t) = (t/s) v(s) for t <= s and v(t) for t >= s, where v is the
/// lift of alpha. Slice s = 1 is the geodesic t -> exp_p(t v(1)); slice
/// s = 0 is alpha itself. Non-timelike slices are reported in the grid.
HomotopyGrid straighten_homotopy(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const LiftResult& lift,
                                 int n_s, int n_t, const LiftOptions& opts = {});

}  // namespace geolift
