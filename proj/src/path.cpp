#include "geolift/path.hpp"

#include <algorithm>
#include <cmath>

namespace geolift {

std::string to_string(PathCharacter c) { return c == PathCharacter::timelike ? "timelike" : "causal"; }

PathCharacter path_character_from_string(const std::string& s) {
  if (s == "timelike") return PathCharacter::timelike;
  if (s == "causal") return PathCharacter::causal;
  throw ConfigError("unknown path character '" + s + "'");
}

PathSpec segment_path(const Point& a, const Point& b) {
  PathSpec P = polyline_path({a, b});
  P.kind = "segment";
  return P;
}

PathSpec polyline_path(const std::vector<Point>& nodes) {
  if (nodes.size() < 2) throw PreconditionError("polyline needs at least two nodes");
  const size_t n = nodes.size() - 1;
  std::vector<double> knots(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) knots[i + 1] = knots[i] + (nodes[i + 1] - nodes[i]).norm();
  const double total = knots.back();
  if (total == 0.0) {
    for (size_t i = 0; i <= n; ++i) knots[i] = static_cast<double>(i) / static_cast<double>(n);
  } else {
    for (auto& k : knots) k /= total;
  }
  knots.back() = 1.0;
  auto leg = [knots, n](double t) {
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    size_t i = it == knots.begin() ? 0 : static_cast<size_t>(it - knots.begin()) - 1;
    return std::min(i, n - 1);
  };
  PathSpec P;
  P.kind = "polyline";
  P.nodes = nodes;
  P.breaks.assign(knots.begin() + 1, knots.end() - 1);
  P.eval = [nodes, knots, leg](double t) -> Point {
    const size_t i = leg(t);
    const double len = knots[i + 1] - knots[i];
    if (len <= 0.0) return nodes[i];
    return nodes[i] + ((t - knots[i]) / len) * (nodes[i + 1] - nodes[i]);
  };
  P.eval_dot = [nodes, knots, leg](double t) -> Vector {
    const size_t i = leg(t);
    const double len = knots[i + 1] - knots[i];
    if (len <= 0.0) return Vector::Zero(nodes[i].size());
    return (nodes[i + 1] - nodes[i]) / len;
  };
  return P;
}

PathSpec function_path(std::function<Point(double)> eval, std::function<Vector(double)> eval_dot,
                       std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  PathSpec P;
  P.eval = std::move(eval);
  P.eval_dot = std::move(eval_dot);
  P.breaks = std::move(breaks);
  return P;
}

PathCheck check_path(const ManifoldSpec& M, const PathSpec& alpha, int n_samples, double tol_causal) {
  std::vector<double> ts;
  for (int i = 0; i <= n_samples; ++i) ts.push_back(static_cast<double>(i) / n_samples);
  for (double b : alpha.breaks) {
    ts.push_back(std::max(0.0, b - 1e-9));
    ts.push_back(b);
  }
  std::sort(ts.begin(), ts.end());
  PathCheck c;
  for (double t : ts) {
    const Point x = alpha.eval(t);
    if (!M.contains(x)) {
      c.in_domain = false;
      c.first_bad_t = t;
      return c;
    }
    if (alpha.causal_tag && M.has_metric()) {
      const CausalCharacter ch = causal_character(M, {x, alpha.eval_dot(t)}, tol_causal);
      const bool ok = *alpha.causal_tag == PathCharacter::timelike ? ch.tag == CausalTag::timelike
                                                                   : ch.tag != CausalTag::spacelike;
      if (!ok) {
        c.character_ok = false;
        c.first_bad_t = t;
        return c;
      }
    }
  }
  return c;
}

void validate_path(const ManifoldSpec& M, const PathSpec& alpha, int n_samples, double tol_causal) {
  const PathCheck c = check_path(M, alpha, n_samples, tol_causal);
  if (!c.in_domain) throw PreconditionError("path leaves the domain at t = " + std::to_string(c.first_bad_t));
  if (!c.character_ok)
    throw PreconditionError("path is not " + to_string(*alpha.causal_tag) + " at t = " + std::to_string(c.first_bad_t));
}

}  // namespace geolift
