#include "geolift/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "flow.hpp"

namespace geolift {

DexpMatrix dexp(const ManifoldSpec& M, const Point& p, const Vector& v, const IntegratorOptions& opts) {
  opts.validate();
  if (!M.contains(p)) throw PreconditionError("dexp: base point outside the domain");
  const detail::GeodesicFlow flow(M, opts, true);
  const detail::FlowRun run = flow.run(flow.initial(p, v), 1.0);
  if (run.termination != Termination::reached_target)
    throw DomainEscapeError("dexp: v outside D_p (numerical): " + to_string(run.termination),
                            detail::to_path(flow, run, M.wrap(p), v));
  const detail::FlowState& s = run.states.back();
  DexpMatrix D;
  D.at = {M.wrap(p), v};
  D.matrix = flow.primary_variation(s);
  D.det = D.matrix.determinant();
  D.frame_det = flow.frame_det(s, p);
  D.endpoint = flow.primary_point(s);
  return D;
}

ConjugateReport conjugate_scan(const ManifoldSpec& M, const Point& p, const TangentVector& w, double t_max,
                               int n_samples, const ConjugateScanOptions& opts) {
  if (std::abs(aux_norm(M, w) - 1.0) > 1e-9) throw PreconditionError("conjugate_scan: ray must be h-unit");
  if (!(t_max > 0.0) || n_samples < 2) throw PreconditionError("conjugate_scan: need t_max > 0 and n_samples >= 2");
  opts.integrator.validate();
  const detail::GeodesicFlow flow(M, opts.integrator, true);
  std::vector<double> grid(static_cast<size_t>(n_samples));
  for (int j = 0; j < n_samples; ++j) grid[static_cast<size_t>(j)] = t_max * (j + 1) / n_samples;
  const detail::FlowRun run = flow.run(flow.initial(p, w.components), t_max, grid);

  const int m = M.dim;
  auto det_at_state = [&](const detail::FlowState& s) { return flow.frame_det(s, p) / std::pow(s.t, m); };
  auto det_at = [&](double t) { return det_at_state(flow.at(run, t)); };

  ConjugateReport rep;
  rep.ray = w;
  rep.scan_horizon = run.states.back().t;
  std::vector<std::pair<double, double>> series{{0.0, 1.0}};
  for (const auto& s : run.states)
    if (s.t > 0.0 && std::binary_search(grid.begin(), grid.end(), s.t)) series.emplace_back(s.t, det_at_state(s));
  if (run.termination != Termination::reached_target && run.states.back().t > series.back().first)
    series.emplace_back(run.states.back().t, det_at_state(run.states.back()));
  rep.det_samples.assign(series.begin() + 1, series.end());

  double running_max = 1.0;
  auto threshold = [&]() { return opts.singular_ratio * std::max(1.0, running_max); };
  std::vector<double> found;
  for (size_t j = 1; j < series.size(); ++j) {
    const auto [t0, d0] = series[j - 1];
    const auto [t1, d1] = series[j];
    running_max = std::max(running_max, std::abs(d0));
    if (d1 == 0.0) {
      found.push_back(t1);
    } else if (d0 != 0.0 && (d0 < 0.0) != (d1 < 0.0)) {
      double a = t0, b = t1, da = d0;
      while (b - a > opts.time_tol) {
        const double mid = 0.5 * (a + b);
        const double dm = det_at(mid);
        if ((dm < 0.0) == (da < 0.0))
          a = mid, da = dm;
        else
          b = mid;
      }
      found.push_back(0.5 * (a + b));
    } else if (j + 1 < series.size()) {
      const double d2 = series[j + 1].second;
      if (std::abs(d1) <= std::abs(d0) && std::abs(d1) <= std::abs(d2) && (d1 < 0.0) == (d2 < 0.0)) {
        // Local minimum of |det| without a sign change: golden-section refine.
        constexpr double g = 0.6180339887498949;
        double a = t0, b = series[j + 1].first;
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = std::abs(det_at(x1)), f2 = std::abs(det_at(x2));
        while (b - a > opts.time_tol) {
          if (f1 < f2) {
            b = x2, x2 = x1, f2 = f1;
            x1 = b - g * (b - a);
            f1 = std::abs(det_at(x1));
          } else {
            a = x1, x1 = x2, f1 = f2;
            x2 = a + g * (b - a);
            f2 = std::abs(det_at(x2));
          }
        }
        const double tm = 0.5 * (a + b);
        if (std::abs(det_at(tm)) < threshold()) found.push_back(tm);
      }
    }
  }
  std::sort(found.begin(), found.end());
  for (double t : found)
    if (rep.conjugate_times.empty() || t - rep.conjugate_times.back() > 10.0 * opts.time_tol)
      rep.conjugate_times.push_back(t);
  return rep;
}

std::vector<Vector> future_causal_rays(const ManifoldSpec& M, const Point& p, int n_rays, std::uint64_t seed) {
  if (!M.is_lorentzian() || !M.time_orientation)
    throw UnsupportedError("future causal rays need a time-oriented Lorentzian manifold");
  const int m = M.dim;
  const Matrix g = M.g(p);
  Vector T = M.time_orientation(M.wrap(p));
  T /= std::sqrt(-T.dot(g * T));
  // g-orthonormal spatial basis of T-perp by Gram-Schmidt.
  std::vector<Vector> E;
  for (int i = 0; i < m && static_cast<int>(E.size()) < m - 1; ++i) {
    Vector e = Vector::Unit(m, i);
    e += e.dot(g * T) * T;
    for (const auto& f : E) e -= e.dot(g * f) * f;
    const double q = e.dot(g * e);
    if (q > 1e-12) E.push_back(e / std::sqrt(q));
  }
  std::vector<Vector> rays;
  auto push = [&](Vector v) {
    v /= aux_norm(M, {p, v});
    rays.push_back(std::move(v));
  };
  if (m == 2) {
    for (int j = 0; j < n_rays; ++j) {
      const double s = n_rays == 1 ? 0.0 : -1.0 + 2.0 * j / (n_rays - 1);
      push(T + s * E[0]);
    }
    return rays;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  for (int j = 0; j < n_rays; ++j) {
    Vector dir = Vector::Zero(m);
    double nn = 0.0;
    std::vector<double> c(E.size());
    for (auto& ci : c) ci = normal(rng), nn += ci * ci;
    const double r = j == 0 ? 0.0 : std::pow(unit(rng), 1.0 / static_cast<double>(m - 1));
    for (size_t i = 0; i < E.size(); ++i) dir += (c[i] / std::sqrt(nn)) * E[i];
    push(T + r * dir);
  }
  return rays;
}

CausalConjugateReport causal_conjugate_certificate(const ManifoldSpec& M, const Point& p, double t_max,
                                                   int n_rays, const ConjugateScanOptions& opts, int n_samples,
                                                   std::uint64_t seed) {
  CausalConjugateReport rep;
  rep.base = M.wrap(p);
  rep.t_max = t_max;
  rep.n_rays = n_rays;
  rep.n_samples = n_samples;
  for (const Vector& w : future_causal_rays(M, p, n_rays, seed)) {
    ConjugateReport r = conjugate_scan(M, p, {p, w}, t_max, n_samples, opts);
    if (!r.conjugate_times.empty()) rep.witnesses.push_back(std::move(r));
  }
  rep.empty = rep.witnesses.empty();
  return rep;
}

}  // namespace geolift
