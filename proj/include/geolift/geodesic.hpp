#pragma once

#include <span>
#include <string>
#include <vector>

#include "geolift/manifold.hpp"

namespace geolift {

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_steps = 200000;
  double min_step = 1e-12;
  double domain_margin = 1e-8;
  /// Upper bound on chart displacement per step on manifolds that do not
  /// fill their chart, so that thin excisions are not stepped over.
  double max_chart_step = 0.05;

  void validate() const;
};

enum class Termination { reached_target, domain_escape, step_collapse, blow_up };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct GeodesicSample {
  double t = 0.0;
  Point x;
  Vector xdot;
};

/// Sampled solution of the geodesic equation, in wrapped primary-chart
/// coordinates.
struct GeodesicPath {
  TangentVector initial;
  std::vector<GeodesicSample> samples;
  double t_end = 0.0;
  Termination termination = Termination::reached_target;
  std::vector<double> periods;

  /// Cubic Hermite interpolation between samples.
  Point position_at(double t) const;
  Vector velocity_at(double t) const;
};

/// Raised by exp_map when v is (numerically) outside the maximal domain D_p.
class DomainEscapeError : public Error {
 public:
  DomainEscapeError(const std::string& what, GeodesicPath partial)
      : Error(what), partial_(std::move(partial)) {}
  const GeodesicPath& partial() const { return partial_; }
  Termination reason() const { return partial_.termination; }

 private:
  GeodesicPath partial_;
};

/// Integrates x'' + Gamma(x)(x', x') = 0 from (p, v) up to t_max. Steps land
/// exactly on every parameter listed in t_eval (which must be sorted and lie
/// in (0, t_max]).
GeodesicPath integrate_geodesic(const ManifoldSpec& M, const Point& p, const Vector& v, double t_max,
                                const IntegratorOptions& opts = {}, std::span<const double> t_eval = {});

/// x(1) of the geodesic with initial velocity v; throws DomainEscapeError.
Point exp_map(const ManifoldSpec& M, const Point& p, const Vector& v, const IntegratorOptions& opts = {});

struct MaximalInterval {
  double a_est = 0.0;
  double b_est = 0.0;
  bool a_is_escape = false;  ///< false: backward probe horizon was reached
  bool b_is_escape = false;
};

/// Estimates J_w intersected with [-t_probe, t_probe] for an h-unit w.
MaximalInterval maximal_interval(const ManifoldSpec& M, const TangentVector& w, double t_probe,
                                 const IntegratorOptions& opts = {});

}  // namespace geolift
