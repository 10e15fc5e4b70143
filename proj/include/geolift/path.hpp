#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geolift/manifold.hpp"

namespace geolift {

enum class PathCharacter { timelike, causal };

std::string to_string(PathCharacter c);
PathCharacter path_character_from_string(const std::string& s);

/// Piecewise-smooth curve alpha: [0,1] -> M in (unwrapped) chart coordinates.
/// eval_dot returns the right derivative at breaks.
struct PathSpec {
  std::function<Point(double)> eval;
  std::function<Vector(double)> eval_dot;
  std::vector<double> breaks;
  std::optional<PathCharacter> causal_tag;
  /// Polyline vertices when the path was built from nodes; empty otherwise.
  std::vector<Point> nodes;
  std::string kind = "function";
};

PathSpec segment_path(const Point& a, const Point& b);

/// Polyline through the nodes, parametrised so each leg gets parameter
/// length proportional to its chart length.
PathSpec polyline_path(const std::vector<Point>& nodes);

PathSpec function_path(std::function<Point(double)> eval, std::function<Vector(double)> eval_dot,
                       std::vector<double> breaks = {});

struct PathCheck {
  bool in_domain = true;
  bool character_ok = true;
  double first_bad_t = -1.0;
};

/// Samples the path at n points plus both sides of every break.
PathCheck check_path(const ManifoldSpec& M, const PathSpec& alpha, int n_samples = 256,
                     double tol_causal = kDefaultTolCausal);

/// Throws PreconditionError if the sampled check fails.
void validate_path(const ManifoldSpec& M, const PathSpec& alpha, int n_samples = 256,
                   double tol_causal = kDefaultTolCausal);

}  // namespace geolift
