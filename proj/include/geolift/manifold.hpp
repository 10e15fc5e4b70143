#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geolift/errors.hpp"

namespace geolift {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

inline constexpr double kDefaultTolCausal = 1e-9;
inline constexpr double kDefaultTolZero = 1e-12;

/// Connection coefficients Gamma^k_{ij} at one chart point.
class Christoffel {
 public:
  Christoffel() = default;
  explicit Christoffel(int dim) : dim_(dim), data_(static_cast<size_t>(dim * dim * dim), 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }
  double operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }

  /// out^k = Gamma^k_{ij} a^i b^j
  Vector contract(const Vector& a, const Vector& b) const;
  double max_asymmetry() const;

 private:
  size_t index(int k, int i, int j) const { return static_cast<size_t>((k * dim_ + i) * dim_ + j); }
  int dim_ = 0;
  std::vector<double> data_;
};

/// Partial derivatives d_l Gamma^k_{ij}.
class ChristoffelDerivative {
 public:
  ChristoffelDerivative() = default;
  explicit ChristoffelDerivative(int dim)
      : dim_(dim), data_(static_cast<size_t>(dim * dim * dim * dim), 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int l, int k, int i, int j) { return data_[index(l, k, i, j)]; }
  double operator()(int l, int k, int i, int j) const { return data_[index(l, k, i, j)]; }

 private:
  size_t index(int l, int k, int i, int j) const {
    return static_cast<size_t>(((l * dim_ + k) * dim_ + i) * dim_ + j);
  }
  int dim_ = 0;
  std::vector<double> data_;
};

enum class Signature { riemannian, lorentzian };

/// An involutive change of chart coordinates under which the coordinate
/// expressions of Gamma, g and h are unchanged. The integrator switches to
/// the image sheet whenever `trigger` fires, which lets a single chart
/// carry geodesics through its point at infinity (the sphere's south pole).
struct ChartInvolution {
  std::function<bool(const Point&)> trigger;
  std::function<Point(const Point&)> map;
  std::function<Matrix(const Point&)> jacobian;
  /// hessian[i](j, k) = d^2 map_i / dx^j dx^k
  std::function<std::vector<Matrix>(const Point&)> hessian;
};

enum class MultiplicityMode { none, deck, conjugate_shells };

/// A single-chart affine manifold. Immutable after construction.
struct ManifoldSpec {
  std::string id;
  int dim = 0;
  std::function<bool(const Point&)> domain_predicate;
  std::function<Christoffel(const Point&)> christoffel;
  /// Empty means central finite differences of `christoffel`.
  std::function<ChristoffelDerivative(const Point&)> christoffel_derivative;
  std::function<Matrix(const Point&)> metric;
  std::optional<Signature> signature;
  std::function<Vector(const Point&)> time_orientation;
  /// Empty means the chart Euclidean metric.
  std::function<Matrix(const Point&)> aux_metric;
  /// Per-coordinate period; 0 for non-periodic coordinates.
  std::vector<double> periods;
  /// Measure-zero excisions; the integrator thickens them by domain_margin.
  std::vector<Point> excised_points;
  /// Chart-Euclidean distance to the chart complement of M. Empty when the
  /// manifold fills its chart.
  std::function<double(const Point&)> boundary_distance;
  /// Empty means wrapped chart-Euclidean distance.
  std::function<double(const Point&, const Point&)> distance;
  std::optional<Vector> deck_generator;
  std::optional<ChartInvolution> involution;
  MultiplicityMode multiplicity = MultiplicityMode::none;
  /// True when every chart point is in M (no excisions, no boundary).
  bool fills_chart = true;
  double fd_step = 1e-6;

  bool has_metric() const { return static_cast<bool>(metric); }
  bool is_lorentzian() const { return signature == Signature::lorentzian; }

  Point wrap(const Point& x) const;
  /// a - b with periodic coordinates reduced to the minimal representative.
  Vector chart_difference(const Point& a, const Point& b) const;
  /// Domain predicate on the wrapped point, excluding excised points exactly.
  bool contains(const Point& x) const;
  /// Distance to the boundary and excised points; +inf when none.
  double clearance(const Point& x) const;

  Matrix g(const Point& x) const;
  Matrix h(const Point& x) const;
  double d_h(const Point& a, const Point& b) const;
  ChristoffelDerivative christoffel_derivative_at(const Point& x) const;
};

struct TangentVector {
  Point base;
  Vector components;
};

enum class CausalTag { timelike, null, spacelike };
enum class TimeOrientation { future, past };

struct CausalCharacter {
  CausalTag tag = CausalTag::spacelike;
  std::optional<TimeOrientation> orientation;
};

/// Builds a catalog entry: euclidean(m), sphere2, cylinder_flat, minkowski2,
/// minkowski2_minus_point, minkowski2_minus_quadrant, minkowski2_strip,
/// desitter2. Throws ConfigError on unknown ids.
ManifoldSpec catalog_manifold(const std::string& id);
std::vector<std::string> catalog_ids();

double metric_product(const ManifoldSpec& M, const Point& x, const Vector& a, const Vector& b);

CausalCharacter causal_character(const ManifoldSpec& M, const TangentVector& v,
                                 double tol_causal = kDefaultTolCausal,
                                 double tol_zero = kDefaultTolZero);

/// sqrt(h_ij v^i v^j)
double aux_norm(const ManifoldSpec& M, const TangentVector& v);

/// Central-difference metric compatibility residual
/// max |d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il| at x.
double levi_civita_residual(const ManifoldSpec& M, const Point& x, double step = 1e-5);

std::string to_string(CausalTag tag);
std::string to_string(TimeOrientation o);

}  // namespace geolift
