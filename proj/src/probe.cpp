#include "geolift/probe.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace geolift {

std::string to_string(ConeKind k) {
  switch (k) {
    case ConeKind::all: return "all";
    case ConeKind::at_point: return "at_point";
    case ConeKind::timelike_at: return "timelike_at";
    case ConeKind::null_at: return "null_at";
    case ConeKind::causal_at: return "causal_at";
  }
  return "all";
}

ConeKind cone_kind_from_string(const std::string& s) {
  for (auto k : {ConeKind::all, ConeKind::at_point, ConeKind::timelike_at, ConeKind::null_at, ConeKind::causal_at})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown cone kind '" + s + "'");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::evidence_proper: return "evidence-proper";
    case Verdict::witness_nonproper: return "witness-nonproper";
    case Verdict::evidence_pseudoconvex: return "evidence-pseudoconvex";
    case Verdict::witness_escape: return "witness-escape";
    case Verdict::evidence_disprisoning: return "evidence-disprisoning";
    case Verdict::witness_imprisoned: return "witness-imprisoned";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict verdict_from_string(const std::string& s) {
  for (auto v : {Verdict::evidence_proper, Verdict::witness_nonproper, Verdict::evidence_pseudoconvex,
                 Verdict::witness_escape, Verdict::evidence_disprisoning, Verdict::witness_imprisoned,
                 Verdict::inconclusive})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown verdict '" + s + "'");
}

namespace {

bool is_causal_kind(ConeKind k) {
  return k == ConeKind::timelike_at || k == ConeKind::null_at || k == ConeKind::causal_at;
}

bool character_matches(ConeKind k, const CausalCharacter& c) {
  switch (k) {
    case ConeKind::timelike_at: return c.tag == CausalTag::timelike;
    case ConeKind::null_at: return c.tag == CausalTag::null;
    case ConeKind::causal_at: return c.tag != CausalTag::spacelike;
    default: return true;
  }
}

// Future unit timelike T and a g-orthonormal spatial frame at x.
void lorentz_frame(const ManifoldSpec& M, const Point& x, Vector& T, std::vector<Vector>& E) {
  const Matrix g = M.g(x);
  T = M.time_orientation(M.wrap(x));
  T /= std::sqrt(-T.dot(g * T));
  E.clear();
  for (int i = 0; i < M.dim && static_cast<int>(E.size()) < M.dim - 1; ++i) {
    Vector e = Vector::Unit(M.dim, i);
    e += e.dot(g * T) * T;
    for (const auto& f : E) e -= e.dot(g * f) * f;
    const double q = e.dot(g * e);
    if (q > 1e-12) E.push_back(e / std::sqrt(q));
  }
}

Vector random_unit(std::mt19937_64& rng, size_t n) {
  std::normal_distribution<double> normal;
  Vector c(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = normal(rng);
  return c.normalized();
}

}  // namespace

bool ConeSpec::contains(const ManifoldSpec& M, const TangentVector& v, double tol_causal) const {
  if (!M.contains(v.base)) return false;
  if (rooted() && M.chart_difference(v.base, root).norm() > 1e-12) return false;
  if (!is_causal_kind(kind)) return true;
  if (v.components.norm() == 0.0) return true;
  return character_matches(kind, causal_character(M, v, tol_causal));
}

std::vector<Vector> ConeSpec::sample_unit(const ManifoldSpec& M, const Point& base, int n, std::mt19937_64& rng) const {
  std::vector<Vector> out;
  auto push = [&](Vector v) {
    v /= aux_norm(M, {base, v});
    out.push_back(std::move(v));
  };
  std::uniform_real_distribution<double> unit;
  const double u = unit(rng);
  const int m = M.dim;
  if (!is_causal_kind(kind)) {
    for (int i = 0; i < m; ++i)
      for (double sgn : {1.0, -1.0}) push(sgn * Vector::Unit(m, i));
    for (int j = 0; j < n; ++j) {
      if (m == 2) {
        const double th = 2.0 * M_PI * (j + u) / n;
        push(Vector{{std::cos(th), std::sin(th)}});
      } else {
        push(random_unit(rng, static_cast<size_t>(m)));
      }
    }
    return out;
  }
  if (!M.is_lorentzian() || !M.time_orientation)
    throw UnsupportedError("causal cones need a time-oriented Lorentzian manifold");
  Vector T;
  std::vector<Vector> E;
  lorentz_frame(M, base, T, E);
  for (int i = 0; i < m; ++i)
    for (double sgn : {1.0, -1.0}) {
      const Vector e = sgn * Vector::Unit(m, i);
      if (contains(M, {base, e})) push(e);
    }
  auto spatial = [&](int j) -> Vector {
    if (m == 2) return (j % 2 == 0 ? 1.0 : -1.0) * E[0];
    const Vector c = random_unit(rng, E.size());
    Vector d = Vector::Zero(m);
    for (size_t i = 0; i < E.size(); ++i) d += c[static_cast<Eigen::Index>(i)] * E[i];
    return d;
  };
  const int half = std::max(1, n / 2);
  for (int j = 0; j < n; ++j) {
    const double sgn = j < half ? 1.0 : -1.0;  // future, then past
    const int jj = j < half ? j : j - half;
    double r = 1.0;
    if (kind == ConeKind::timelike_at) {
      r = (jj + u) / half;
      r = std::min(r, 1.0 - 1e-6);
    } else if (kind == ConeKind::causal_at) {
      r = jj < 2 ? 1.0 : (jj - 2 + u) / std::max(1, half - 2);
    }
    if (m == 2 && kind != ConeKind::null_at) {
      // Spread over both sides: r in [-1, 1].
      r = kind == ConeKind::causal_at && jj < 2 ? (jj == 0 ? 1.0 : -1.0) : 2.0 * r - 1.0;
      push(sgn * (T + r * E[0]));
    } else {
      push(sgn * (T + r * spatial(jj)));
    }
  }
  return out;
}

bool BallSpec::contains(const ManifoldSpec& M, const Point& x) const {
  return M.contains(x) && M.d_h(x, center) <= radius && M.clearance(x) >= collar_width();
}

double exhaustion(const ManifoldSpec& M, const Point& c, const Point& x) {
  const double cl = M.clearance(x);
  return std::max(M.d_h(x, c), cl > 0.0 ? 1.0 / cl : std::numeric_limits<double>::infinity());
}

namespace {

std::vector<double> t_grid(double horizon, double spacing) {
  const int n = std::max(2, static_cast<int>(std::ceil(horizon / spacing)));
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = horizon * (i + 1) / n;
  return g;
}

// Largest parameter at which the sampled geodesic is still in K.
double last_exit(const ManifoldSpec& M, const BallSpec& K, const GeodesicPath& path, const std::vector<double>& grid) {
  double best = 0.0;
  bool prev_in = K.contains(M, path.samples.front().x);
  double prev_t = 0.0;
  for (double t : grid) {
    if (t > path.t_end) break;
    const bool in = K.contains(M, path.position_at(t));
    if (prev_in && !in) {
      double a = prev_t, b = t;
      while (b - a > 1e-10 * std::max(1.0, b)) {
        const double mid = 0.5 * (a + b);
        (K.contains(M, path.position_at(mid)) ? a : b) = mid;
      }
      best = std::max(best, a);
    }
    if (in) best = std::max(best, t);
    prev_in = in;
    prev_t = t;
  }
  return best;
}

IntegratorOptions tighter(const IntegratorOptions& o) {
  IntegratorOptions t = o;
  t.rel_tol = std::min(o.rel_tol, 1e-12);
  t.abs_tol = std::min(o.abs_tol, 1e-14);
  return t;
}

std::vector<Point> base_points(const ManifoldSpec& M, const ConeSpec& cone, const BallSpec& K, std::mt19937_64& rng,
                               int n) {
  if (cone.rooted()) return {cone.root};
  std::vector<Point> pts{K.center};
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  for (int tries = 0; static_cast<int>(pts.size()) < n && tries < 100 * n; ++tries) {
    Point x = K.center;
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += K.radius * sym(rng);
    if (K.contains(M, x)) pts.push_back(x);
  }
  return pts;
}

enum class Trend { stable, growing, mixed };

Trend trend(const std::vector<ProbeLevel>& levels, double stability) {
  bool stable = true, growing = true;
  for (size_t i = levels.size() >= 3 ? levels.size() - 2 : 1; i < levels.size(); ++i) {
    const double a = levels[i - 1].bound, b = levels[i].bound;
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    stable = stable && std::abs(b - a) < stability * scale;
    growing = growing && b > (1.0 + stability) * a;
  }
  if (levels.size() < 2) return Trend::mixed;
  return stable ? Trend::stable : growing ? Trend::growing : Trend::mixed;
}

}  // namespace

ProbeReport properness_probe(const ManifoldSpec& M, const ConeSpec& cone, const BallSpec& K, const ProbeBudget& budget,
                             const IntegratorOptions& opts) {
  ProbeReport rep;
  rep.probe = "proper";
  rep.seed = budget.seed;
  rep.parameters = {{"radius", K.radius},          {"collar", K.collar_width()}, {"n_rays", budget.n_rays},
                    {"horizon", budget.horizon},   {"doublings", budget.doublings},
                    {"stability", budget.stability}};
  std::mt19937_64 rng(budget.seed);
  std::vector<TangentVector> records;
  for (int b = 0; b <= budget.doublings; ++b) {
    const int n = budget.n_rays << b;
    const double horizon = budget.horizon * std::ldexp(1.0, b);
    const std::vector<double> grid = t_grid(horizon, K.radius / 16.0);
    ProbeLevel lvl{n, horizon, 0.0};
    TangentVector rec;
    const auto bases = base_points(M, cone, K, rng, 4);
    for (const Point& base : bases) {
      for (const Vector& w : cone.sample_unit(M, base, n / static_cast<int>(bases.size()), rng)) {
        const GeodesicPath path = integrate_geodesic(M, base, w, horizon, opts, grid);
        const double t = last_exit(M, K, path, grid);
        if (t > lvl.bound) {
          lvl.bound = t;
          rec = {base, t * w};
        }
      }
    }
    rep.levels.push_back(lvl);
    if (lvl.bound > 0.0) records.push_back(rec);
  }
  switch (trend(rep.levels, budget.stability)) {
    case Trend::stable: rep.verdict = Verdict::evidence_proper; break;
    case Trend::mixed: rep.verdict = Verdict::inconclusive; break;
    case Trend::growing: {
      // Newton-refine each record onto the centre, then re-check at a tighter tolerance.
      const IntegratorOptions tight = tighter(opts);
      double prev = 0.0;
      bool ok = records.size() >= 2;
      for (auto& r : records) {
        if (M.contains(K.center)) {
          Vector v = r.components;
          for (int i = 0; i < 20; ++i) {
            DexpMatrix D;
            try {
              D = dexp(M, r.base, v, tight);
            } catch (const DomainEscapeError&) {
              break;
            }
            const Vector res = M.chart_difference(K.center, D.endpoint);
            if (res.norm() < 1e-12) break;
            v += Eigen::FullPivLU<Matrix>(D.matrix).solve(res);
          }
          r.components = v;
        }
        try {
          const Point x = exp_map(M, r.base, r.components, tight);
          const double nrm = aux_norm(M, r);
          ok = ok && K.contains(M, x) && nrm > prev;
          prev = nrm;
        } catch (const DomainEscapeError&) {
          ok = false;
        }
      }
      rep.witness_vectors = records;
      rep.witness_validated = ok;
      rep.verdict = ok ? Verdict::witness_nonproper : Verdict::inconclusive;
      break;
    }
  }
  return rep;
}

namespace {

// Largest d_h distance from the start, or +inf if the geodesic did not reach
// the horizon.
double excursion(const ManifoldSpec& M, const Point& base, const Vector& w, double horizon,
                 const IntegratorOptions& opts, GeodesicPath* keep = nullptr) {
  const std::vector<double> grid = t_grid(horizon, 0.05);
  GeodesicPath path = integrate_geodesic(M, base, w, horizon, opts, grid);
  if (path.termination != Termination::reached_target) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (const auto& s : path.samples) r = std::max(r, M.d_h(s.x, base));
  if (keep) *keep = std::move(path);
  return r;
}

}  // namespace

ProbeReport imprisonment_scan(const ManifoldSpec& M, const ConeSpec& cone, int n_rays, double t_horizon,
                              double bound_radius, const IntegratorOptions& opts, std::uint64_t seed) {
  ProbeReport rep;
  rep.probe = "imprison";
  rep.seed = seed;
  rep.parameters = {{"n_rays", n_rays}, {"horizon", t_horizon}, {"bound_radius", bound_radius}};
  std::mt19937_64 rng(seed);
  const Point base = cone.root;
  const IntegratorOptions tight = tighter(opts);
  int tested = 0;
  for (const Vector& w : cone.sample_unit(M, base, n_rays, rng)) {
    for (double dir : {1.0, -1.0}) {
      ++tested;
      if (excursion(M, base, dir * w, t_horizon, opts) > bound_radius) continue;
      GeodesicPath path;
      const double again = excursion(M, base, dir * w, t_horizon, tight, &path);
      if (again <= bound_radius * (1.0 + 1e-6)) {
        rep.witness_paths.push_back(std::move(path));
        rep.witness_vectors.push_back({base, dir * w});
      }
    }
  }
  rep.witness_validated = !rep.witness_paths.empty();
  rep.verdict = rep.witness_paths.empty() ? Verdict::evidence_disprisoning : Verdict::witness_imprisoned;
  rep.levels.push_back({tested, t_horizon, bound_radius});
  return rep;
}

namespace {

// Largest exhaustion value along the geodesic exp_a(s v), s in [0, 1].
double segment_rho(const ManifoldSpec& M, const Point& c, const Point& a, const Vector& v,
                   const IntegratorOptions& opts, GeodesicPath* keep = nullptr) {
  const std::vector<double> grid = t_grid(1.0, 1.0 / 256.0);
  GeodesicPath path = integrate_geodesic(M, a, v, 1.0, opts, grid);
  if (path.termination != Termination::reached_target) return std::numeric_limits<double>::infinity();
  double best = 0.0, best_s = 0.0;
  for (double s : grid) {
    const double r = exhaustion(M, c, path.position_at(s));
    if (r > best) best = r, best_s = s;
  }
  // Golden-section refinement of the peak.
  constexpr double gr = 0.6180339887498949;
  double lo = std::max(0.0, best_s - 1.0 / 256.0), hi = std::min(1.0, best_s + 1.0 / 256.0);
  auto f = [&](double s) { return exhaustion(M, c, path.position_at(s)); };
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo), f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-12) {
    if (f1 > f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  best = std::max({best, f1, f2});
  if (keep) *keep = std::move(path);
  return best;
}

}  // namespace

ProbeReport pseudoconvexity_scan(const ManifoldSpec& M, const ConeSpec& cone, const BallSpec& K, int n_segments,
                                 const ConnectOptions& opts, std::uint64_t seed, int doublings, double stability) {
  ProbeReport rep;
  rep.probe = "pseudoconvex";
  rep.seed = seed;
  rep.parameters = {{"radius", K.radius},
                    {"collar", K.collar_width()},
                    {"n_segments", n_segments},
                    {"doublings", doublings},
                    {"stability", stability}};
  if (is_causal_kind(cone.kind) && (!M.is_lorentzian() || !M.time_orientation))
    throw UnsupportedError("causal cones need a time-oriented Lorentzian manifold");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  auto sample_K = [&]() -> std::optional<Point> {
    for (int tries = 0; tries < 10000; ++tries) {
      Point x = K.center;
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += K.radius * sym(rng);
      if (K.contains(M, x)) return x;
    }
    return std::nullopt;
  };
  // Sup of the exhaustion over K; the collar only matters where M has a boundary.
  const double rho_K = M.fills_chart ? K.radius : std::max(K.radius, 1.0 / K.collar_width());
  const IntegratorOptions tight = tighter(opts.lift.integrator);
  // Pairs (a, q) in K joined by a geodesic of the cone's character; returns
  // the exhaustion sup along it, or nullopt when there is no such geodesic.
  auto evaluate = [&](const Point& a, const Point& q) -> std::optional<std::pair<double, Vector>> {
    ConnectionResult cr;
    try {
      cr = connect(M, a, q, SeedStrategy::straight, opts);
    } catch (const Error&) {
      return std::nullopt;
    }
    std::optional<std::pair<double, Vector>> best;
    for (const auto& s : cr.solutions) {
      if (is_causal_kind(cone.kind) && !character_matches(cone.kind, causal_character(M, s.v, opts.lift.tol_causal)))
        continue;
      const double r = segment_rho(M, K.center, a, s.v.components, opts.lift.integrator);
      if (std::isfinite(r) && (!best || r > best->first)) best = {r, s.v.components};
    }
    return best;
  };

  // Each doubling extends the previous random sample, then spends an eighth
  // of its budget on hill-climbing from the worst pair seen so far, with
  // steps scaled to that pair's closest approach 1 / rho.
  std::mt19937_64 climb_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  std::vector<std::pair<Point, Vector>> records;
  std::optional<std::pair<Point, Point>> worst;
  double worst_r = 0.0;
  double bound = rho_K;
  int drawn = 0;
  for (int b = 0; b <= doublings; ++b) {
    const int n = n_segments << b;
    ProbeLevel lvl{n, 0.0, bound};
    std::optional<std::pair<Point, Vector>> rec;
    for (; drawn < n; ++drawn) {
      const auto a = sample_K(), q = sample_K();
      if (!a || !q) break;
      const auto e = evaluate(*a, *q);
      if (!e || e->first <= worst_r) continue;
      worst_r = e->first;
      worst = {*a, *q};
      if (e->first > lvl.bound) {
        lvl.bound = e->first;
        rec = {*a, e->second};
      }
    }
    for (int step = 0; worst && step < std::max(1, n / 8); ++step) {
      const double sigma = std::min(0.1 * K.radius, 0.5 / worst_r);
      Point a = worst->first, q = worst->second;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        a[i] += sigma * gauss(climb_rng);
        q[i] += sigma * gauss(climb_rng);
      }
      if (!K.contains(M, a) || !K.contains(M, q)) continue;
      const auto e = evaluate(a, q);
      if (!e || e->first <= worst_r) continue;
      worst_r = e->first;
      worst = {a, q};
      if (e->first > lvl.bound) {
        lvl.bound = e->first;
        rec = {a, e->second};
      }
    }
    bound = lvl.bound;
    rep.levels.push_back(lvl);
    if (rec) records.push_back(*rec);
  }
  switch (trend(rep.levels, stability)) {
    case Trend::stable: rep.verdict = Verdict::evidence_pseudoconvex; break;
    case Trend::mixed: rep.verdict = Verdict::inconclusive; break;
    case Trend::growing: {
      bool ok = records.size() >= 2;
      double prev = rho_K;
      for (const auto& [a, v] : records) {
        GeodesicPath path;
        const double r = segment_rho(M, K.center, a, v, tight, &path);
        ok = ok && std::isfinite(r) && r > prev && K.contains(M, path.samples.front().x) &&
             K.contains(M, path.samples.back().x);
        prev = r;
        rep.witness_paths.push_back(std::move(path));
        rep.witness_vectors.push_back({a, v});
      }
      rep.witness_validated = ok;
      rep.verdict = ok ? Verdict::witness_escape : Verdict::inconclusive;
      break;
    }
  }
  return rep;
}

ConsistencyReport properness_consistency_check(const ManifoldSpec& M, const ConeSpec& cone, const BallSpec& K,
                                               const ProbeBudget& budget, const ConnectOptions& opts) {
  if (!cone.rooted()) throw PreconditionError("properness_consistency_check needs a cone rooted at a point");
  ConsistencyReport rep;
  rep.proper = properness_probe(M, cone, K, budget, opts.lift.integrator);
  rep.pseudoconvex =
      pseudoconvexity_scan(M, cone, K, budget.n_segments, opts, budget.seed, budget.doublings, budget.stability);
  // The imprisonment verdict must also hold at the doubled budgets.
  for (int b = 0; b <= budget.doublings; ++b) {
    ProbeReport r = imprisonment_scan(M, cone, budget.n_rays << b, budget.horizon * std::ldexp(1.0, b),
                                      budget.bound_radius, opts.lift.integrator, budget.seed);
    if (b == 0) {
      rep.imprison = std::move(r);
      continue;
    }
    rep.imprison.levels.push_back(r.levels.back());
    if (r.verdict == rep.imprison.verdict) continue;
    rep.note += "imprisonment verdict changed at budget level " + std::to_string(b) + "; ";
    if (r.verdict == Verdict::witness_imprisoned) {
      rep.imprison.verdict = r.verdict;
      rep.imprison.witness_paths = std::move(r.witness_paths);
      rep.imprison.witness_vectors = std::move(r.witness_vectors);
      rep.imprison.witness_validated = r.witness_validated;
    }
  }
  const auto v1 = rep.proper.verdict, v2 = rep.pseudoconvex.verdict, v3 = rep.imprison.verdict;
  rep.decided = v1 != Verdict::inconclusive && v2 != Verdict::inconclusive && v3 != Verdict::inconclusive;
  if (rep.decided) {
    const bool proper = v1 == Verdict::evidence_proper;
    const bool rhs = v2 == Verdict::evidence_pseudoconvex && v3 == Verdict::evidence_disprisoning;
    rep.consistent = proper == rhs;
    if (!rep.consistent) rep.note += "verdicts contradict proper <=> pseudoconvex and disprisoning (probe-budget artifact)";
  } else {
    rep.note += "at least one probe was inconclusive";
  }
  return rep;
}

}  // namespace geolift
