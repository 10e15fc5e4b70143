#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geolift/connect.hpp"

namespace geolift {

enum class ConeKind { all, at_point, timelike_at, null_at, causal_at };

std::string to_string(ConeKind k);
ConeKind cone_kind_from_string(const std::string& s);

/// A set C of tangent vectors closed under the scalings allowed inside D.
/// Timelike, null and causal cones contain both time orientations. For the
/// `all` kind, `root` is only the centre used to pick sample base points.
struct ConeSpec {
  ConeKind kind = ConeKind::all;
  Point root;

  bool rooted() const { return kind != ConeKind::all; }
  bool contains(const ManifoldSpec& M, const TangentVector& v, double tol_causal = kDefaultTolCausal) const;
  /// n h-unit members at `base`: a stratified seeded sample plus every chart
  /// axis direction that is a member.
  std::vector<Vector> sample_unit(const ManifoldSpec& M, const Point& base, int n, std::mt19937_64& rng) const;
};

/// Closed compact K = {x : d_h(x, center) <= radius, clearance(x) >= collar}.
/// collar <= 0 selects 0.05 * radius.
struct BallSpec {
  Point center;
  double radius = 1.0;
  double collar = 0.0;

  double collar_width() const { return collar > 0.0 ? collar : 0.05 * radius; }
  bool contains(const ManifoldSpec& M, const Point& x) const;
};

/// max(d_h(x, c), 1 / clearance(x)): its sublevel sets exhaust M by compacts.
double exhaustion(const ManifoldSpec& M, const Point& c, const Point& x);

enum class Verdict {
  evidence_proper,
  witness_nonproper,
  evidence_pseudoconvex,
  witness_escape,
  evidence_disprisoning,
  witness_imprisoned,
  inconclusive
};

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct ProbeBudget {
  int n_rays = 64;
  int n_segments = 64;
  double horizon = 16.0;
  int doublings = 2;
  double bound_radius = 4.0;
  /// Two successive doublings must change the bound by less than this factor.
  double stability = 0.05;
  std::uint64_t seed = 1;
};

struct ProbeLevel {
  int samples = 0;
  double horizon = 0.0;
  double bound = 0.0;
};

struct ProbeReport {
  std::string probe;
  Verdict verdict = Verdict::inconclusive;
  std::vector<ProbeLevel> levels;
  std::vector<TangentVector> witness_vectors;
  std::vector<GeodesicPath> witness_paths;
  bool witness_validated = false;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> parameters;
};

/// Supremum of |t w|_h over ray samples with exp(t w) in K, per budget level.
ProbeReport properness_probe(const ManifoldSpec& M, const ConeSpec& cone, const BallSpec& K,
                             const ProbeBudget& budget = {}, const IntegratorOptions& opts = {});

ProbeReport imprisonment_scan(const ManifoldSpec& M, const ConeSpec& cone, int n_rays, double t_horizon,
                              double bound_radius, const IntegratorOptions& opts = {}, std::uint64_t seed = 1);

/// K* is the largest exhaustion value over K and over every connecting
/// geodesic of the cone's causal character between sampled pairs in K.
ProbeReport pseudoconvexity_scan(const ManifoldSpec& M, const ConeSpec& cone, const BallSpec& K, int n_segments,
                                 const ConnectOptions& opts = {}, std::uint64_t seed = 1, int doublings = 2,
                                 double stability = 0.05);

struct ConsistencyReport {
  ProbeReport proper, pseudoconvex, imprison;
  /// False when a verdict was inconclusive.
  bool decided = false;
  bool consistent = false;
  std::string note;
};

/// proper <=> (pseudoconvex and disprisoning), checked on the three probes.
ConsistencyReport properness_consistency_check(const ManifoldSpec& M, const ConeSpec& cone, const BallSpec& K,
                                               const ProbeBudget& budget = {}, const ConnectOptions& opts = {});

}  // namespace geolift
