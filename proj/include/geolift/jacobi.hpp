#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "geolift/geodesic.hpp"

namespace geolift {

/// d(exp_p)_v. Column i is J_i(1) for the Jacobi field with J_i(0) = 0 and
/// J_i'(0) = e_i, in primary-chart coordinates.
struct DexpMatrix {
  TangentVector at;
  Matrix matrix;
  double det = 1.0;
  /// Determinant in an h-volume-normalised frame that stays consistent when
  /// the integrator changes chart sheets. Equals det wherever h is the chart
  /// metric and no sheet change occurred.
  double frame_det = 1.0;
  Point endpoint;
};

/// Throws DomainEscapeError when exp_p(v) is not defined.
DexpMatrix dexp(const ManifoldSpec& M, const Point& p, const Vector& v, const IntegratorOptions& opts = {});

struct ConjugateScanOptions {
  IntegratorOptions integrator;
  /// |det| below singular_ratio * max(1, running max |det|) counts as singular.
  double singular_ratio = 1e-7;
  double time_tol = 1e-8;
};

struct ConjugateReport {
  TangentVector ray;
  std::vector<double> conjugate_times;
  double scan_horizon = 0.0;
  /// (t, frame determinant of d(exp_p) at t*w)
  std::vector<std::pair<double, double>> det_samples;
};

ConjugateReport conjugate_scan(const ManifoldSpec& M, const Point& p, const TangentVector& w, double t_max,
                               int n_samples, const ConjugateScanOptions& opts = {});

struct CausalConjugateReport {
  Point base;
  double t_max = 0.0;
  int n_rays = 0;
  int n_samples = 0;
  bool empty = true;
  std::vector<ConjugateReport> witnesses;
};

/// Scans n_rays h-unit rays spread over the closed future causal cone at p.
CausalConjugateReport causal_conjugate_certificate(const ManifoldSpec& M, const Point& p, double t_max,
                                                   int n_rays, const ConjugateScanOptions& opts = {},
                                                   int n_samples = 400, std::uint64_t seed = 1);

/// h-unit future causal directions at p: evenly spread in dimension 2,
/// sampled with the given seed otherwise. The first and last entries are
/// null in dimension 2.
std::vector<Vector> future_causal_rays(const ManifoldSpec& M, const Point& p, int n_rays, std::uint64_t seed);

}  // namespace geolift
