// Acceptance checks. Each criterion prints one PASS/FAIL line with its
// tolerances and runtime limit; the exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "geolift/probe.hpp"
#include "oracles.hpp"

using namespace geolift;

namespace {

Point P(double a, double b) { return (Point(2) << a, b).finished(); }

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = o.ok && dt < limit_s;
  failures += !ok;
  std::printf("%s  %2d  %s: %s [%.2f s, limit %.0f s]\n", ok ? "PASS" : "FAIL", id, title, o.detail.c_str(), dt, limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// An interior sample point for each catalog entry.
Point interior(const std::string& id, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), V(0.25, 0.75);
  if (id == "minkowski2_strip") return P(U(rng), V(rng));
  if (id == "minkowski2_minus_quadrant") return P(0.5 + std::abs(U(rng)), -0.5 - std::abs(U(rng)));
  if (id == "minkowski2_minus_point") return P(-0.5 - std::abs(U(rng)), U(rng));
  return P(U(rng), U(rng));
}

Outcome sphere_conjugate_points() {
  const auto S = catalog_manifold("sphere2");
  const double tol = 1e-6;
  double worst = 0.0;
  int bad = 0;
  for (int k = 0; k < 32; ++k) {
    const double a = 2.0 * M_PI * k / 32.0;
    const ConjugateReport r = conjugate_scan(S, P(0, 0), {P(0, 0), P(0.5 * std::cos(a), 0.5 * std::sin(a))}, 7.0, 700);
    if (r.conjugate_times.size() != 2) {
      ++bad;
      continue;
    }
    for (int j = 0; j < 2; ++j)
      worst = std::max(worst, std::abs(r.conjugate_times[j] - oracle::sphere_conjugate_time(j + 1)));
  }
  return {bad == 0 && worst <= tol, fmt("32 rays, %d with wrong count, max |t - k pi| = %.2e (tol %.0e)", bad, worst, tol)};
}

Outcome sphere_multiplicity() {
  const auto S = catalog_manifold("sphere2");
  const double theta = 1.0, tol = 1e-5;
  const Point q = oracle::sphere_chart(oracle::great_circle(P(0, 0), P(0.5, 0), theta));
  ConnectOptions o;
  o.velocity_budget = 13.0;
  const ConnectionResult r = connect(S, P(0, 0), q, SeedStrategy::shells, o);
  std::vector<double> norms;
  for (const auto& s : r.solutions) norms.push_back(s.h_norm);
  std::sort(norms.begin(), norms.end());
  const std::vector<double> want{theta, 2 * M_PI - theta, 2 * M_PI + theta, 4 * M_PI - theta};
  double worst = norms.size() == want.size() ? 0.0 : INFINITY;
  for (size_t i = 0; i < std::min(norms.size(), want.size()); ++i) worst = std::max(worst, std::abs(norms[i] - want[i]));
  std::ostringstream got;
  for (double n : norms) got << (got.tellp() ? ", " : "") << fmt("%.8f", n);
  return {worst <= tol, fmt("|v| = {%s}, max deviation %.2e (tol %.0e)", got.str().c_str(), worst, tol)};
}

Outcome cylinder_multiplicity() {
  const auto C = catalog_manifold("cylinder_flat");
  const double tol = 1e-8;
  const Eigen::Vector2d p(0.3, -0.7), q(1.1, 2.0);
  const ConnectionResult a = enumerate_multiplicity(C, p, q, 5);
  const ConnectionResult b = enumerate_multiplicity(C, p, p, 5);
  double worst = 0.0;
  for (const auto& s : a.solutions) worst = std::max(worst, (s.v.components - oracle::cylinder_velocity(p, q, s.class_label)).norm());
  bool zero_loop = false;
  for (const auto& s : b.solutions) {
    worst = std::max(worst, (s.v.components - oracle::cylinder_velocity(p, p, s.class_label)).norm());
    zero_loop = zero_loop || s.class_label == 0;
  }
  const bool ok = a.solutions.size() == 11 && b.solutions.size() == 10 && !zero_loop && worst <= tol;
  return {ok, fmt("%zu solutions p != q (want 11), %zu loops p = q (want 10), max error %.2e (tol %.0e)", a.solutions.size(),
                  b.solutions.size(), worst, tol)};
}

Outcome minus_point_obstruction() {
  const auto M = catalog_manifold("minkowski2_minus_point");
  const ConnectionResult r = connect_causal(M, P(0, 0), P(2, 0));
  if (r.diagnostics.empty()) return {false, "no lift attempted"};
  const LiftResult& l = r.diagnostics.back().lift;
  const double gap = l.terminal_iterate ? (*l.terminal_iterate - P(2, 0)).norm() : INFINITY;
  const bool ok = r.solutions.empty() && l.failure == LiftFailure::domain_escape && l.reach >= 0.99 && gap <= 1e-3;
  return {ok, fmt("failure %s, reach %.6f (>= 0.99), |v_term - (2,0)| = %.2e (tol 1e-3), %zu solutions",
                  l.failure ? to_string(*l.failure).c_str() : "none", l.reach, gap, r.solutions.size())};
}

Outcome strip_properness() {
  const auto S = catalog_manifold("minkowski2_strip");
  ProbeBudget b;
  b.doublings = 2;
  const ConsistencyReport r =
      properness_consistency_check(S, {ConeKind::causal_at, P(0, 0.5)}, {P(0, 0.5), 0.4, 0.0}, b, {});
  auto bounds = [](const ProbeReport& p) {
    std::ostringstream os;
    for (const auto& l : p.levels) os << (os.tellp() ? "/" : "") << fmt("%.3g", l.bound);
    return os.str();
  };
  const bool ok = r.consistent && r.proper.verdict == Verdict::evidence_proper &&
                  r.pseudoconvex.verdict == Verdict::evidence_pseudoconvex &&
                  r.imprison.verdict == Verdict::evidence_disprisoning && r.proper.levels.size() == 3 && r.note.empty();
  return {ok, fmt("%s (%s), %s (%s), %s over %zu levels, consistent=%d, stability 5%%", to_string(r.proper.verdict).c_str(),
                  bounds(r.proper).c_str(), to_string(r.pseudoconvex.verdict).c_str(), bounds(r.pseudoconvex).c_str(),
                  to_string(r.imprison.verdict).c_str(), r.imprison.levels.size(), r.consistent)};
}

Outcome quadrant_separation() {
  const auto Q = catalog_manifold("minkowski2_minus_quadrant");
  const Point p = P(1, -1);
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> U(-1.0, 1.0), T(0.5, 3.0);
  int lifted = 0, tried = 0, complete = 0;
  while (lifted < 20 && tried < 200) {
    ++tried;
    const double tf = T(rng);
    const Vector a = P(tf, 0.8 * tf * U(rng));
    const Vector bump = P(0.1 * U(rng), 0.3 * U(rng));
    PathSpec alpha = function_path([=](double t) -> Point { return p + t * a + std::sin(M_PI * t) * bump; },
                                   [=](double t) -> Vector { return a + M_PI * std::cos(M_PI * t) * bump; });
    alpha.causal_tag = PathCharacter::timelike;
    const PathCheck c = check_path(Q, alpha);
    if (!c.in_domain || !c.character_ok) continue;
    ++lifted;
    const LiftResult r = causal_lift(Q, p, alpha);
    complete += r.status == LiftStatus::complete && r.ccp == CcpVerdict::evidence_for;
  }
  const ProbeReport pc = pseudoconvexity_scan(Q, {ConeKind::causal_at, p}, {P(0, 0), 0.5, 0.0}, 64);
  std::ostringstream lv;
  for (const auto& l : pc.levels) lv << (lv.tellp() ? "/" : "") << fmt("%.3g", l.bound);
  const bool ok = lifted == 20 && complete == 20 && pc.verdict == Verdict::witness_escape && pc.witness_validated;
  return {ok, fmt("%d/%d timelike lifts complete with CCP evidence; corner ball: %s (K* %s), validated=%d", complete, lifted,
                  to_string(pc.verdict).c_str(), lv.str().c_str(), pc.witness_validated)};
}

Outcome hadamard_cartan() {
  const double tol = 1e-6;
  double worst_oracle = 0.0, worst_relift = 0.0;
  int single = 0, total = 0;
  for (const char* id : {"minkowski2", "minkowski2_strip"}) {
    const auto M = catalog_manifold(id);
    const bool strip = std::string(id) == "minkowski2_strip";
    const Point p = strip ? P(0, 0.5) : P(0, 0);
    std::mt19937_64 rng(strip ? 72 : 71);
    std::uniform_real_distribution<double> T(0.2, 4.0), F(-0.9, 0.9);
    for (int i = 0; i < 100; ++i) {
      Point q;
      do {
        const double t = T(rng);
        q = p + P(t, F(rng) * t);
      } while (!M.contains(q) || M.clearance(q) < 0.02);
      ++total;
      const ConnectionResult r = connect_causal(M, p, q);
      if (r.solutions.size() != 1 || r.solutions[0].character->tag != CausalTag::timelike) continue;
      ++single;
      const Vector v = r.solutions[0].v.components;
      worst_oracle = std::max(worst_oracle, (v - (q - p)).norm());
      // Bend the seed sideways by a fraction of its timelike margin.
      const Vector d = q - p;
      const double margin = d[0] - std::abs(d[1]);
      Point w = p + 0.5 * d + P(0, 0.25 * margin * F(rng));
      if (strip) w[1] = std::clamp(w[1], 0.05, 0.95);
      const ConnectionResult b = connect_causal(M, p, q, {}, w);
      if (b.solutions.size() != 1) {
        worst_relift = INFINITY;
        continue;
      }
      worst_relift = std::max(worst_relift, (b.solutions[0].v.components - v).norm());
    }
  }
  const bool ok = single == total && worst_relift <= tol && worst_oracle <= tol;
  return {ok, fmt("%d/%d unique timelike solutions, bent re-lift max gap %.2e, |v - (q - p)| max %.2e (tol %.0e)", single,
                  total, worst_relift, worst_oracle, tol)};
}

Outcome homotopy() {
  const auto M = catalog_manifold("minkowski2");
  PathSpec a = function_path([](double t) -> Point { return P(2 * t, 0.3 * std::sin(M_PI * t)); },
                             [](double t) -> Vector { return P(2, 0.3 * M_PI * std::cos(M_PI * t)); });
  a.causal_tag = PathCharacter::timelike;
  const LiftResult lift = causal_lift(M, P(0, 0), a);
  if (lift.status != LiftStatus::complete) return {false, "lift failed"};
  const HomotopyGrid G = straighten_homotopy(M, P(0, 0), a, lift, 50, 50);
  const double gmax = *std::max_element(G.slice_max_g.begin(), G.slice_max_g.end());
  // the endpoint error reported by the grid, and an independent check of
  // both fixed ends on every slice
  double ends = G.endpoint_error;
  for (const auto& row : G.x) ends = std::max({ends, row.front().norm(), (row.back() - a.eval(1.0)).norm()});
  const bool ok = G.s.size() == 50 && G.t.size() == 50 && gmax < -1e-6 && ends <= 1e-8;
  return {ok, fmt("50x50 grid, max g(x', x') = %.4f (< -1e-6), endpoint drift %.2e (tol 1e-8)", gmax, ends)};
}

Outcome jacobi_fd() {
  const double eps = 1e-5, rel = 1e-4, id_tol = 1e-9;
  double worst = 0.0, worst_id = 0.0;
  int triples = 0, entries = 0;
  for (const auto& id : catalog_ids()) {
    const auto M = catalog_manifold(id);
    std::mt19937_64 rng(std::hash<std::string>{}(id) % 1000003);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int n = 0, guard = 0;
    while (n < 50 && guard++ < 1000) {
      const Point p = interior(id, rng);
      const double scale = id == "sphere2" ? 0.6 : 0.4;
      const Vector v = scale * P(U(rng), U(rng));
      Vector w = P(U(rng), U(rng));
      w /= w.norm();
      DexpMatrix d;
      Vector fd;
      try {
        d = dexp(M, p, v);
        fd = M.chart_difference(exp_map(M, p, v + eps * w), exp_map(M, p, v - eps * w)) / (2 * eps);
      } catch (const DomainEscapeError&) {
        continue;
      }
      const Vector dw = d.matrix * w;
      worst = std::max(worst, (dw - fd).norm() / (1.0 + d.matrix.norm()));
      if (n == 0) worst_id = std::max(worst_id, (dexp(M, p, Vector::Zero(2)).matrix - Matrix::Identity(2, 2)).norm());
      ++n;
    }
    triples += n;
    entries += n == 50;
  }
  const int total = static_cast<int>(catalog_ids().size());
  const bool ok = entries == total && worst <= rel && worst_id <= id_tol;
  return {ok, fmt("%d triples on %d/%d entries, max |dexp w - FD| / (1 + |dexp|) = %.2e (tol %.0e, eps %.0e), "
                  "|dexp(0) - I| = %.1e (tol %.0e)",
                  triples, entries, total, worst, rel, eps, worst_id, id_tol)};
}

Outcome lift_correctness() {
  const double res_tol = 1e-7, agree_tol = 1e-6;
  double worst_res = 0.0, worst_gap = 0.0;
  int complete = 0, drawn = 0;
  for (const auto& id : catalog_ids()) {
    const auto M = catalog_manifold(id);
    std::mt19937_64 rng(std::hash<std::string>{}(id) % 999983);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int n = 0, guard = 0;
    while (n < 20 && guard++ < 1000) {
      const Point p = interior(id, rng);
      const double scale = id == "sphere2" ? 0.5 : 0.3;
      const Vector a = scale * P(U(rng), U(rng)), b = 0.3 * scale * P(U(rng), U(rng));
      const PathSpec alpha = function_path([=](double t) -> Point { return p + t * a + std::sin(M_PI * t) * b; },
                                           [=](double t) -> Vector { return a + M_PI * std::cos(M_PI * t) * b; });
      if (!check_path(M, alpha).in_domain || M.clearance(p) < 0.05) continue;
      ++n;
      ++drawn;
      LiftOptions o;
      o.checkpoints = 10;
      const LiftResult r = lift_path(M, p, alpha, Vector::Zero(2), o);
      LiftOptions half = o;
      half.dt_max *= 0.5;
      const LiftResult h = lift_path(M, p, alpha, Vector::Zero(2), half);
      if (r.status != LiftStatus::complete || h.status != LiftStatus::complete) continue;
      ++complete;
      for (const auto& s : r.lift_samples)
        worst_res = std::max(worst_res, M.chart_difference(exp_map(M, p, s.v), alpha.eval(s.t)).norm());
      for (const auto& s : r.lift_samples) {
        const auto it = std::find_if(h.lift_samples.begin(), h.lift_samples.end(), [&](const LiftSample& x) { return std::abs(x.t - s.t) < 1e-12; });
        const bool checkpoint = std::abs(s.t * 10 - std::round(s.t * 10)) < 1e-12;
        if (!checkpoint) continue;
        worst_gap = it == h.lift_samples.end() ? INFINITY : std::max(worst_gap, (it->v - s.v).norm());
      }
    }
  }
  const bool ok = drawn == 20 * static_cast<int>(catalog_ids().size()) && complete == drawn && worst_res <= res_tol &&
                  worst_gap <= agree_tol;
  return {ok, fmt("%d/%d lifts complete, max |exp(v(t)) - alpha(t)| = %.2e (tol %.0e), half-step gap %.2e (tol %.0e)",
                  complete, drawn, worst_res, res_tol, worst_gap, agree_tol)};
}

}  // namespace

int main() {
  criterion(1, "sphere conjugate points", 10, sphere_conjugate_points);
  criterion(2, "sphere multiplicity", 30, sphere_multiplicity);
  criterion(3, "cylinder covering multiplicity", 10, cylinder_multiplicity);
  criterion(4, "minkowski minus point obstruction", 5, minus_point_obstruction);
  criterion(5, "strip properness", 60, strip_properness);
  criterion(6, "minkowski minus quadrant separation", 60, quadrant_separation);
  criterion(7, "lorentzian hadamard-cartan sampling", 120, hadamard_cartan);
  criterion(8, "homotopy straightening", 10, homotopy);
  criterion(9, "jacobi finite differences", 60, jacobi_fd);
  criterion(10, "lift correctness and uniqueness", 120, lift_correctness);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
