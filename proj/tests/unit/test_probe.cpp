#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "geolift/probe.hpp"

using namespace geolift;

namespace {
Point P(double a, double b) { return (Point(2) << a, b).finished(); }
ConeSpec cone(ConeKind k, Point root) { return {k, std::move(root)}; }
}  // namespace

TEST_CASE("cone membership and samples") {
  const auto M = catalog_manifold("minkowski2");
  const ConeSpec c = cone(ConeKind::causal_at, P(0, 0));
  CHECK(c.contains(M, {P(0, 0), P(1, 0.5)}));
  CHECK(c.contains(M, {P(0, 0), P(-1, 1)}));
  CHECK_FALSE(c.contains(M, {P(0, 0), P(0.5, 1)}));
  CHECK_FALSE(c.contains(M, {P(1, 0), P(1, 0)}));
  std::mt19937_64 rng(1);
  for (const auto& w : c.sample_unit(M, P(0, 0), 32, rng)) {
    CHECK(c.contains(M, {P(0, 0), w}));
    CHECK(aux_norm(M, {P(0, 0), w}) == doctest::Approx(1.0));
  }
}

TEST_CASE("exhaustion and compact balls") {
  const auto S = catalog_manifold("minkowski2_strip");
  const BallSpec K{P(0, 0.5), 0.4, 0.0};
  CHECK(K.collar_width() == doctest::Approx(0.02));
  CHECK(K.contains(S, P(0.1, 0.5)));
  CHECK_FALSE(K.contains(S, P(0, 0.99)));
  CHECK(exhaustion(S, P(0, 0.5), P(0, 0.9)) == doctest::Approx(10.0));
  CHECK(exhaustion(catalog_manifold("euclidean(2)"), P(0, 0), P(3, 4)) == doctest::Approx(5.0));
}

TEST_CASE("properness") {
  SUBCASE("euclidean ball is its own preimage") {
    const ProbeReport r = properness_probe(catalog_manifold("euclidean(2)"), cone(ConeKind::at_point, P(0, 0)),
                                           {P(0, 0), 1.0, 0.0}, {.n_rays = 16});
    CHECK(r.verdict == Verdict::evidence_proper);
    CHECK(r.levels.back().bound == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("strip causal cone") {
    const ProbeReport r = properness_probe(catalog_manifold("minkowski2_strip"), cone(ConeKind::causal_at, P(0, 0.5)),
                                           {P(0, 0.5), 0.4, 0.0}, {.n_rays = 16});
    CHECK(r.verdict == Verdict::evidence_proper);
  }
  SUBCASE("cylinder unrolls into an unbounded preimage") {
    const ProbeReport r = properness_probe(catalog_manifold("cylinder_flat"), cone(ConeKind::at_point, P(0, 0)),
                                           {P(0, 0), 0.5, 0.0}, {.n_rays = 16});
    CHECK(r.verdict == Verdict::witness_nonproper);
    CHECK(r.witness_validated);
  }
}

TEST_CASE("imprisonment") {
  CHECK(imprisonment_scan(catalog_manifold("euclidean(2)"), cone(ConeKind::at_point, P(0, 0)), 16, 16, 4).verdict ==
        Verdict::evidence_disprisoning);
  CHECK(imprisonment_scan(catalog_manifold("minkowski2_strip"), cone(ConeKind::causal_at, P(0, 0.5)), 16, 16, 4).verdict ==
        Verdict::evidence_disprisoning);
  const ProbeReport c = imprisonment_scan(catalog_manifold("cylinder_flat"), cone(ConeKind::at_point, P(0, 0)), 16, 16, 4);
  CHECK(c.verdict == Verdict::witness_imprisoned);
  bool fibre = false;
  for (const auto& w : c.witness_vectors) fibre = fibre || std::abs(w.components[0]) < 1e-12;
  CHECK(fibre);
}

TEST_CASE("pseudoconvexity") {
  SUBCASE("euclidean chords stay in the ball") {
    const ProbeReport r = pseudoconvexity_scan(catalog_manifold("euclidean(2)"), cone(ConeKind::all, P(0, 0)),
                                               {P(0, 0), 1.0, 0.0}, 16);
    CHECK(r.verdict == Verdict::evidence_pseudoconvex);
    CHECK(r.levels.back().bound == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("strip") {
    const ProbeReport r = pseudoconvexity_scan(catalog_manifold("minkowski2_strip"), cone(ConeKind::causal_at, P(0, 0.5)),
                                               {P(0, 0.5), 0.4, 0.0}, 16);
    CHECK(r.verdict == Verdict::evidence_pseudoconvex);
  }
}

TEST_CASE("consistency") {
  const ConsistencyReport e = properness_consistency_check(catalog_manifold("euclidean(2)"), cone(ConeKind::at_point, P(0, 0)),
                                                           {P(0, 0), 1.0, 0.0}, {.n_rays = 16, .n_segments = 16});
  CHECK(e.consistent);
  CHECK(e.proper.verdict == Verdict::evidence_proper);
  CHECK(e.pseudoconvex.verdict == Verdict::evidence_pseudoconvex);
  CHECK(e.imprison.verdict == Verdict::evidence_disprisoning);

  const ConsistencyReport c = properness_consistency_check(catalog_manifold("cylinder_flat"), cone(ConeKind::at_point, P(0, 0)),
                                                           {P(0, 0), 0.5, 0.0}, {.n_rays = 16, .n_segments = 16});
  CHECK(c.consistent);
  CHECK(c.proper.verdict == Verdict::witness_nonproper);
  CHECK(c.imprison.verdict == Verdict::witness_imprisoned);

  CHECK_THROWS_AS(properness_consistency_check(catalog_manifold("euclidean(2)"), cone(ConeKind::all, P(0, 0)),
                                               {P(0, 0), 1.0, 0.0}),
                  PreconditionError);
}

TEST_CASE("quadrant corner: pseudoconvexity escapes on every seed") {
  const auto Q = catalog_manifold("minkowski2_minus_quadrant");
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const ProbeReport r = pseudoconvexity_scan(Q, cone(ConeKind::causal_at, P(1, -1)), {P(0, 0), 0.5, 0.0}, 64, {}, seed);
    CAPTURE(seed);
    CHECK(r.verdict == Verdict::witness_escape);
    CHECK(r.witness_validated);
    for (size_t i = 1; i < r.levels.size(); ++i) CHECK(r.levels[i].bound >= r.levels[i - 1].bound);
  }
}

TEST_CASE("doubling budgets never flips evidence-proper") {
  struct Case {
    const char* id;
    ConeSpec cone;
    BallSpec K;
  };
  const Case cases[] = {{"euclidean(2)", cone(ConeKind::at_point, P(0, 0)), {P(0, 0), 1.0, 0.0}},
                        {"minkowski2", cone(ConeKind::causal_at, P(0, 0)), {P(0, 0), 1.0, 0.0}},
                        {"minkowski2_strip", cone(ConeKind::causal_at, P(0, 0.5)), {P(0, 0.5), 0.4, 0.0}}};
  for (const auto& c : cases) {
    const auto M = catalog_manifold(c.id);
    for (int d = 2; d <= 3; ++d) {
      ProbeBudget b;
      b.n_rays = 16;
      b.doublings = d;
      CAPTURE(c.id);
      CAPTURE(d);
      CHECK(properness_probe(M, c.cone, c.K, b).verdict == Verdict::evidence_proper);
    }
  }
}
