#include "geolift/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "flow.hpp"

namespace geolift {

void IntegratorOptions::validate() const {
  if (!(rel_tol > 0.0 && abs_tol > 0.0 && min_step > 0.0 && domain_margin > 0.0 && max_chart_step > 0.0 &&
        max_steps > 0))
    throw ConfigError("integrator options must all be positive");
  if (rel_tol > 1e-3 || abs_tol > 1e-3) throw ConfigError("rel_tol and abs_tol must not exceed 1e-3");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::reached_target: return "reached_target";
    case Termination::domain_escape: return "domain_escape";
    case Termination::step_collapse: return "step_collapse";
    case Termination::blow_up: return "blow_up";
  }
  return "reached_target";
}

Termination termination_from_string(const std::string& s) {
  if (s == "reached_target") return Termination::reached_target;
  if (s == "domain_escape") return Termination::domain_escape;
  if (s == "step_collapse") return Termination::step_collapse;
  if (s == "blow_up") return Termination::blow_up;
  throw ConfigError("unknown termination '" + s + "'");
}

namespace {

// Index of the sample interval [i, i+1] containing t.
size_t locate(const std::vector<GeodesicSample>& s, double t) {
  auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const GeodesicSample& g) { return v < g.t; });
  size_t i = it == s.begin() ? 0 : static_cast<size_t>(it - s.begin()) - 1;
  return std::min(i, s.size() - 2);
}

Vector unwrapped_delta(const std::vector<double>& periods, const Point& a, const Point& b) {
  Vector d = b - a;
  for (size_t i = 0; i < periods.size(); ++i)
    if (periods[i] > 0.0) d[static_cast<Eigen::Index>(i)] -= periods[i] * std::floor(d[i] / periods[i] + 0.5);
  return d;
}

}  // namespace

Point GeodesicPath::position_at(double t) const {
  if (samples.size() == 1) return samples.front().x;
  const size_t i = locate(samples, t);
  const auto& a = samples[i];
  const auto& b = samples[i + 1];
  const double h = b.t - a.t;
  if (h <= 0.0) return a.x;
  const double th = (t - a.t) / h, t2 = th * th, t3 = t2 * th;
  const Vector d = unwrapped_delta(periods, a.x, b.x);
  return a.x + (t3 - 2 * t2 + th) * h * a.xdot + (-2 * t3 + 3 * t2) * d + (t3 - t2) * h * b.xdot;
}

Vector GeodesicPath::velocity_at(double t) const {
  if (samples.size() == 1) return samples.front().xdot;
  const size_t i = locate(samples, t);
  const auto& a = samples[i];
  const auto& b = samples[i + 1];
  const double h = b.t - a.t;
  if (h <= 0.0) return a.xdot;
  const double th = (t - a.t) / h, t2 = th * th;
  const Vector d = unwrapped_delta(periods, a.x, b.x);
  return (3 * t2 - 4 * th + 1) * a.xdot + (-6 * t2 + 6 * th) * d / h + (3 * t2 - 2 * th) * b.xdot;
}

GeodesicPath integrate_geodesic(const ManifoldSpec& M, const Point& p, const Vector& v, double t_max,
                                const IntegratorOptions& opts, std::span<const double> t_eval) {
  opts.validate();
  if (p.size() != M.dim || v.size() != M.dim) throw PreconditionError("integrate_geodesic: dimension mismatch");
  if (!M.contains(p)) throw PreconditionError("integrate_geodesic: base point outside the domain");
  if (!(t_max > 0.0)) throw PreconditionError("integrate_geodesic: t_max must be positive");
  const detail::GeodesicFlow flow(M, opts, false);
  const detail::FlowRun run = flow.run(flow.initial(p, v), t_max, t_eval);
  return detail::to_path(flow, run, M.wrap(p), v);
}

Point exp_map(const ManifoldSpec& M, const Point& p, const Vector& v, const IntegratorOptions& opts) {
  GeodesicPath path = integrate_geodesic(M, p, v, 1.0, opts);
  if (path.termination != Termination::reached_target)
    throw DomainEscapeError("v outside D_p (numerical): " + to_string(path.termination), std::move(path));
  return path.samples.back().x;
}

MaximalInterval maximal_interval(const ManifoldSpec& M, const TangentVector& w, double t_probe,
                                 const IntegratorOptions& opts) {
  const double n = aux_norm(M, w);
  if (std::abs(n - 1.0) > 1e-9) throw PreconditionError("maximal_interval: w must be h-unit");
  if (!(t_probe > 0.0)) throw PreconditionError("maximal_interval: t_probe must be positive");
  const GeodesicPath fwd = integrate_geodesic(M, w.base, w.components, t_probe, opts);
  const GeodesicPath bwd = integrate_geodesic(M, w.base, -w.components, t_probe, opts);
  MaximalInterval J;
  J.b_est = fwd.t_end;
  J.b_is_escape = fwd.termination != Termination::reached_target;
  J.a_est = -bwd.t_end;
  J.a_is_escape = bwd.termination != Termination::reached_target;
  return J;
}

}  // namespace geolift
