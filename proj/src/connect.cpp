#include "geolift/connect.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <map>

namespace geolift {

std::string to_string(SeedStrategy s) {
  switch (s) {
    case SeedStrategy::straight: return "straight";
    case SeedStrategy::waypoints: return "waypoints";
    case SeedStrategy::shells: return "shells";
  }
  return "straight";
}

SeedStrategy seed_strategy_from_string(const std::string& s) {
  for (auto v : {SeedStrategy::straight, SeedStrategy::waypoints, SeedStrategy::shells})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown seed strategy '" + s + "'");
}

namespace {

double segment_point_distance(const Point& a, const Point& b, const Point& c) {
  const Vector d = b - a;
  const double L2 = d.squaredNorm();
  const double s = L2 > 0.0 ? std::clamp((c - a).dot(d) / L2, 0.0, 1.0) : 0.0;
  return (a + s * d - c).norm();
}

bool seed_ok(const ManifoldSpec& M, const std::vector<Point>& nodes, std::optional<PathCharacter> character,
             double tol_causal) {
  for (size_t i = 0; i + 1 < nodes.size(); ++i)
    for (const auto& e : M.excised_points)
      if (segment_point_distance(nodes[i], nodes[i + 1], e) < 1e-6) return false;
  PathSpec alpha = polyline_path(nodes);
  alpha.causal_tag = character;
  const PathCheck c = check_path(M, alpha, 512, tol_causal);
  return c.in_domain && c.character_ok;
}

Vector perpendicular(const Vector& d) {
  const Eigen::Index m = d.size();
  if (d.norm() == 0.0) return Vector::Unit(m, m - 1);
  Eigen::Index i_min = 0;
  for (Eigen::Index i = 1; i < m; ++i)
    if (std::abs(d[i]) < std::abs(d[i_min])) i_min = i;
  Vector n = Vector::Unit(m, i_min);
  n -= (n.dot(d) / d.squaredNorm()) * d;
  return n.normalized();
}

// p -> q in the given class, bent through a perpendicular-bisector waypoint
// when the straight leg leaves M. Empty when no bend works.
std::vector<Point> build_seed(const ManifoldSpec& M, const Point& p, const Point& q, const ConnectOptions& opts,
                              std::optional<PathCharacter> character) {
  if (seed_ok(M, {p, q}, character, opts.lift.tol_causal)) return {p, q};
  const Vector d = q - p;
  const Vector n = perpendicular(d);
  const double L = std::max(d.norm(), 1e-3);
  for (int k = 0; k < opts.bend_retries; ++k) {
    const double off = opts.bend_scale * L * (k / 2 + 1) * (k % 2 == 0 ? 1.0 : -1.0);
    const Point w = 0.5 * (p + q) + off * n;
    if (seed_ok(M, {p, w, q}, character, opts.lift.tol_causal)) return {p, w, q};
  }
  return {};
}

class Collector {
 public:
  Collector(const ManifoldSpec& M, const Point& p, const Point& q, const ConnectOptions& opts)
      : M_(M), opts_(opts) {
    res_.p = p;
    res_.q = q;
  }

  void lift_seed(const std::vector<Point>& nodes, int label, const std::string& seed, const Vector& v0,
                 double max_norm = std::numeric_limits<double>::infinity()) {
    const PathSpec alpha = polyline_path(nodes);
    ConnectAttempt att;
    att.class_label = label;
    att.seed = seed;
    att.nodes = nodes;
    att.lift = lift_path(M_, res_.p, alpha, v0, opts_.lift);
    const bool ok = att.lift.status == LiftStatus::complete;
    if (ok) add(att.lift.endpoint_velocity(), label, max_norm);
    res_.diagnostics.push_back(std::move(att));
  }

  void add(const Vector& v, int label, double max_norm) {
    Solution s;
    s.v = {res_.p, v};
    s.class_label = label;
    s.h_norm = aux_norm(M_, s.v);
    if (s.h_norm > max_norm) return;
    if (M_.has_metric()) s.character = causal_character(M_, s.v, opts_.lift.tol_causal);
    if (opts_.character_filter) {
      if (!s.character) return;
      const bool ok = *opts_.character_filter == PathCharacter::timelike ? s.character->tag == CausalTag::timelike
                                                                         : s.character->tag != CausalTag::spacelike;
      if (!ok) return;
    }
    for (const auto& o : res_.solutions)
      if (aux_norm(M_, {res_.p, o.v.components - v}) <= opts_.dedup_tol) return;
    res_.solutions.push_back(std::move(s));
  }

  ConnectionResult take() { return std::move(res_); }
  ConnectionResult& result() { return res_; }

 private:
  const ManifoldSpec& M_;
  const ConnectOptions& opts_;
  ConnectionResult res_;
};

void check_endpoints(const ManifoldSpec& M, const Point& p, const Point& q) {
  if (p.size() != M.dim || q.size() != M.dim) throw PreconditionError("connect: dimension mismatch");
  if (!M.contains(p)) throw PreconditionError("connect: p outside the domain");
  if (!M.contains(q)) throw PreconditionError("connect: q outside the domain");
}

void connect_shells(const ManifoldSpec& M, const Point& p, const Point& q, const ConnectOptions& opts,
                    Collector& out, int max_label) {
  Vector w = perpendicular(M.chart_difference(q, p));
  w /= aux_norm(M, {p, w});
  ConjugateScanOptions so;
  so.integrator = opts.lift.integrator;
  const ConjugateReport rep = conjugate_scan(M, p, {p, w}, opts.velocity_budget, opts.shell_samples, so);
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), rep.conjugate_times.begin(), rep.conjugate_times.end());
  bounds.push_back(rep.scan_horizon);
  for (size_t c = 0; c + 1 < bounds.size() && static_cast<int>(c) <= max_label; ++c) {
    if (bounds[c + 1] - bounds[c] < 1e-6) continue;
    const Vector v0 = 0.5 * (bounds[c] + bounds[c + 1]) * w;
    Point x0;
    try {
      x0 = exp_map(M, p, v0, opts.lift.integrator);
    } catch (const DomainEscapeError&) {
      continue;
    }
    const Point target = x0 + M.chart_difference(q, x0);
    const std::vector<Point> nodes = build_seed(M, x0, target, opts, std::nullopt);
    if (nodes.empty()) continue;
    out.lift_seed(nodes, static_cast<int>(c), "shell", v0, opts.velocity_budget);
  }
}

}  // namespace

ConnectionResult connect(const ManifoldSpec& M, const Point& p, const Point& q, SeedStrategy strategy,
                         const ConnectOptions& opts, const std::vector<Point>& waypoints,
                         const std::optional<Vector>& v0) {
  check_endpoints(M, p, q);
  Collector out(M, p, q, opts);
  const Vector start = v0 ? *v0 : Vector::Zero(M.dim);
  Point origin = p;
  if (v0) origin = exp_map(M, p, *v0, opts.lift.integrator);
  switch (strategy) {
    case SeedStrategy::straight: {
      const std::vector<Point> nodes = build_seed(M, origin, origin + M.chart_difference(q, origin), opts, std::nullopt);
      if (nodes.empty()) throw ConfigError("connect: no seed path inside the domain");
      out.lift_seed(nodes, 0, nodes.size() == 2 ? "straight" : "bent", start);
      break;
    }
    case SeedStrategy::waypoints: {
      std::vector<Point> nodes{origin};
      nodes.insert(nodes.end(), waypoints.begin(), waypoints.end());
      nodes.push_back(q);
      if (!seed_ok(M, nodes, std::nullopt, opts.lift.tol_causal))
        throw ConfigError("connect: waypoint seed leaves the domain");
      out.lift_seed(nodes, 0, "waypoints", start);
      break;
    }
    case SeedStrategy::shells:
      connect_shells(M, p, q, opts, out, std::numeric_limits<int>::max());
      break;
  }
  return out.take();
}

ConnectionResult connect_causal(const ManifoldSpec& M, const Point& p, const Point& q, const ConnectOptions& opts,
                                const std::optional<Point>& waypoint) {
  if (!M.is_lorentzian() || !M.time_orientation) throw UnsupportedError("connect_causal needs a time-oriented spacetime");
  check_endpoints(M, p, q);
  const Point qq = p + M.chart_difference(q, p);
  std::vector<Point> nodes;
  if (waypoint) {
    if (seed_ok(M, {p, *waypoint, qq}, PathCharacter::timelike, opts.lift.tol_causal)) nodes = {p, *waypoint, qq};
  } else {
    nodes = build_seed(M, p, qq, opts, PathCharacter::timelike);
  }
  if (nodes.empty()) throw PreconditionError("connect_causal: q not in I(p) (numerically undetermined): no timelike seed");

  PathSpec alpha = polyline_path(nodes);
  alpha.causal_tag = PathCharacter::timelike;
  ConnectOptions o = opts;
  o.character_filter = PathCharacter::timelike;
  Collector out(M, p, q, o);
  ConnectAttempt att;
  att.seed = waypoint ? "waypoint" : (nodes.size() == 2 ? "straight" : "bent");
  att.nodes = nodes;
  att.lift = causal_lift(M, p, alpha, opts.lift);
  if (att.lift.status == LiftStatus::complete)
    out.add(att.lift.endpoint_velocity(), 0, std::numeric_limits<double>::infinity());
  out.result().diagnostics.push_back(std::move(att));
  return out.take();
}

ConnectionResult enumerate_multiplicity(const ManifoldSpec& M, const Point& p, const Point& q, int class_budget,
                                        const ConnectOptions& opts) {
  check_endpoints(M, p, q);
  if (class_budget < 0) throw PreconditionError("enumerate_multiplicity: class_budget must be nonnegative");
  Collector out(M, p, q, opts);
  out.result().class_budget = class_budget;
  switch (M.multiplicity) {
    case MultiplicityMode::deck: {
      const Vector P = *M.deck_generator;
      const Vector d = M.chart_difference(q, p);
      const bool loop = d.norm() < 1e-12;
      for (int k = -class_budget; k <= class_budget; ++k) {
        if (loop && k == 0) continue;
        const std::vector<Point> nodes = build_seed(M, p, p + d + k * P, opts, std::nullopt);
        if (nodes.empty()) continue;
        out.lift_seed(nodes, k, "deck", Vector::Zero(M.dim));
      }
      break;
    }
    case MultiplicityMode::conjugate_shells:
      connect_shells(M, p, q, opts, out, class_budget);
      break;
    case MultiplicityMode::none: {
      const bool periodic = std::any_of(M.periods.begin(), M.periods.end(), [](double x) { return x > 0.0; });
      if (!M.fills_chart || periodic)
        throw UnsupportedError("enumerate_multiplicity: " + M.id + " declares no deck generator");
      const std::vector<Point> nodes = build_seed(M, p, q, opts, std::nullopt);
      out.lift_seed(nodes, 0, "straight", Vector::Zero(M.dim));
      break;
    }
  }
  ConnectionResult r = out.take();
  std::stable_sort(r.solutions.begin(), r.solutions.end(),
                   [](const Solution& a, const Solution& b) { return a.class_label < b.class_label; });
  return r;
}

namespace {

// v with exp_p(v) = alpha(s), refined by Newton from the interpolated lift.
Vector lift_value(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const LiftResult& lift, double s,
                  const LiftOptions& opts) {
  const auto& S = lift.lift_samples;
  auto it = std::lower_bound(S.begin(), S.end(), s, [](const LiftSample& a, double x) { return a.t < x; });
  Vector v;
  if (it == S.end())
    v = S.back().v;
  else if (it == S.begin() || it->t == s)
    v = it->v;
  else {
    const auto& b = *it;
    const auto& a = *(it - 1);
    v = a.v + (s - a.t) / (b.t - a.t) * (b.v - a.v);
  }
  const Point target = alpha.eval(s);
  for (int i = 0; i < 30; ++i) {
    const DexpMatrix D = dexp(M, p, v, opts.integrator);
    const Vector r = M.chart_difference(target, D.endpoint);
    if (r.norm() <= 1e-13 * (1.0 + target.norm())) break;
    v += Eigen::FullPivLU<Matrix>(D.matrix).solve(r);
  }
  return v;
}

}  // namespace

HomotopyGrid straighten_homotopy(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const LiftResult& lift,
                                 int n_s, int n_t, const LiftOptions& opts) {
  if (lift.status != LiftStatus::complete) throw PreconditionError("straighten_homotopy: lift is not complete");
  if (lift.lift_samples.front().v.norm() != 0.0) throw PreconditionError("straighten_homotopy: lift must start at 0_p");
  if (n_s < 2 || n_t < 2) throw PreconditionError("straighten_homotopy: grid needs at least 2 x 2 nodes");
  HomotopyGrid G;
  G.p = M.wrap(p);
  for (int i = 0; i < n_s; ++i) G.s.push_back(static_cast<double>(i) / (n_s - 1));
  for (int j = 0; j < n_t; ++j) G.t.push_back(static_cast<double>(j) / (n_t - 1));

  std::map<double, Vector> vcache;
  auto v_at = [&](double s) -> const Vector& {
    auto it = vcache.find(s);
    if (it == vcache.end()) it = vcache.emplace(s, s == 0.0 ? Vector::Zero(M.dim) : lift_value(M, p, alpha, lift, s, opts)).first;
    return it->second;
  };

  const Point end = M.wrap(alpha.eval(1.0));
  for (double s : G.s) {
    std::vector<Point> xs;
    std::vector<Vector> vs;
    std::vector<double> gs;
    std::optional<GeodesicPath> geo;
    if (s > 0.0) {
      std::vector<double> taus;
      for (double t : G.t)
        if (t > 0.0 && t <= s) taus.push_back(std::min(1.0, t / s));
      taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
      geo = integrate_geodesic(M, p, v_at(s), 1.0, opts.integrator, taus);
      if (geo->termination != Termination::reached_target)
        throw InvariantBreach("straighten_homotopy: geodesic slice escaped the domain");
    }
    for (double t : G.t) {
      Point x;
      Vector xd;
      if (s > 0.0 && t <= s) {
        const double tau = std::min(1.0, t / s);
        x = geo->position_at(tau);
        xd = geo->velocity_at(tau) / s;
      } else {
        x = M.wrap(exp_map(M, p, v_at(t), opts.integrator));
        xd = alpha.eval_dot(t);
      }
      gs.push_back(M.has_metric() ? metric_product(M, x, xd, xd) : std::nan(""));
      xs.push_back(std::move(x));
      vs.push_back(std::move(xd));
    }
    G.endpoint_error = std::max({G.endpoint_error, M.chart_difference(xs.front(), p).norm(),
                                 M.chart_difference(xs.back(), end).norm()});
    const double gmax = *std::max_element(gs.begin(), gs.end());
    const bool timelike = M.is_lorentzian() && gmax < -opts.tol_causal;
    G.slice_max_g.push_back(gmax);
    G.slice_timelike.push_back(timelike);
    G.all_timelike = G.all_timelike && timelike;
    G.x.push_back(std::move(xs));
    G.xdot.push_back(std::move(vs));
    G.g.push_back(std::move(gs));
  }
  return G;
}

}  // namespace geolift
