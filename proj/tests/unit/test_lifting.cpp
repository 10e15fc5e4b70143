#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "geolift/lifting.hpp"
#include "oracles.hpp"

using namespace geolift;

namespace {
Point P(double a, double b) { return (Point(2) << a, b).finished(); }

PathSpec curve(std::function<Point(double)> f, std::function<Vector(double)> df) {
  return function_path(std::move(f), std::move(df));
}
}  // namespace

TEST_CASE("paths") {
  const PathSpec poly = polyline_path({P(0, 0), P(3, 0), P(3, 4)});
  CHECK((poly.eval(0.0) - P(0, 0)).norm() == 0.0);
  CHECK((poly.eval(1.0) - P(3, 4)).norm() < 1e-15);
  // legs get parameter length proportional to chart length: 3 / 7
  CHECK((poly.eval(3.0 / 7.0) - P(3, 0)).norm() < 1e-14);
  CHECK(poly.breaks.size() == 1);
  CHECK((poly.eval_dot(0.2) - P(7, 0)).norm() < 1e-12);

  const auto S = catalog_manifold("minkowski2_strip");
  CHECK(check_path(S, segment_path(P(0, 0.5), P(1, 0.6))).in_domain);
  const PathCheck bad = check_path(S, segment_path(P(0, 0.5), P(0, 1.5)));
  CHECK_FALSE(bad.in_domain);
  CHECK(bad.first_bad_t == doctest::Approx(0.5).epsilon(0.01));
  PathSpec spacelike = segment_path(P(0, 0.2), P(0.1, 0.8));
  spacelike.causal_tag = PathCharacter::timelike;
  CHECK_FALSE(check_path(S, spacelike).character_ok);
  CHECK_THROWS_AS(validate_path(S, spacelike), PreconditionError);
}

TEST_CASE("flat lift is translation") {
  const auto E = catalog_manifold("euclidean(2)");
  const PathSpec a = curve([](double t) -> Point { return P(std::sin(3 * t), t * t - t); },
                           [](double t) -> Vector { return P(3 * std::cos(3 * t), 2 * t - 1); });
  const LiftResult r = lift_path(E, P(0, 0), a, Vector::Zero(2));
  CHECK(r.status == LiftStatus::complete);
  CHECK(r.reach == 1.0);
  for (const auto& s : r.lift_samples) CHECK((s.v - a.eval(s.t)).norm() < 1e-9);
}

TEST_CASE("lift residuals and the lifting relation on the sphere") {
  const auto S = catalog_manifold("sphere2");
  const PathSpec a = curve([](double t) -> Point { return P(0.6 * t, 0.3 * std::sin(2 * t)); },
                           [](double t) -> Vector { return P(0.6, 0.6 * std::cos(2 * t)); });
  const LiftResult r = lift_path(S, P(0, 0), a, Vector::Zero(2));
  REQUIRE(r.status == LiftStatus::complete);
  for (const auto& s : r.lift_samples) {
    CHECK(s.residual <= 1e-7);
    CHECK((oracle::sphere_embed(a.eval(s.t)) - oracle::great_circle(P(0, 0), s.v, 1.0)).norm() < 1e-6);
  }
}

TEST_CASE("v0 must lie over alpha(0)") {
  const auto E = catalog_manifold("euclidean(2)");
  CHECK_THROWS_AS(lift_path(E, P(0, 0), segment_path(P(0, 0), P(1, 0)), P(0.5, 0)), PreconditionError);
  LiftOptions o;
  o.lift_tol = 0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
}

TEST_CASE("minkowski2 causal lift of (2t, t(1-t))") {
  const auto M = catalog_manifold("minkowski2");
  PathSpec a = curve([](double t) -> Point { return P(2 * t, t * (1 - t)); },
                     [](double t) -> Vector { return P(2, 1 - 2 * t); });
  a.causal_tag = PathCharacter::timelike;
  const LiftResult r = causal_lift(M, P(0, 0), a);
  CHECK(r.status == LiftStatus::complete);
  CHECK((r.endpoint_velocity() - P(2, 0)).norm() < 1e-9);
  CHECK(*r.ccp == CcpVerdict::evidence_for);
  const auto ch = causal_character(M, {P(0, 0), r.endpoint_velocity()});
  CHECK(ch.tag == CausalTag::timelike);
  CHECK(*ch.orientation == TimeOrientation::future);
}

TEST_CASE("strip causal lift of a constant-x segment") {
  const auto M = catalog_manifold("minkowski2_strip");
  PathSpec a = segment_path(P(0, 0.5), P(1, 0.5));
  a.causal_tag = PathCharacter::timelike;
  const LiftResult r = causal_lift(M, P(0, 0.5), a);
  CHECK(r.status == LiftStatus::complete);
  CHECK((r.endpoint_velocity() - P(1, 0)).norm() < 1e-9);
}

TEST_CASE("minus point: the lift runs into the hole") {
  const auto M = catalog_manifold("minkowski2_minus_point");
  PathSpec a = curve([](double t) -> Point { return P(2 * t, 0.2 * std::sin(M_PI * t)); },
                     [](double t) -> Vector { return P(2, 0.2 * M_PI * std::cos(M_PI * t)); });
  a.causal_tag = PathCharacter::timelike;
  const LiftResult r = causal_lift(M, P(0, 0), a);
  CHECK(r.status == LiftStatus::failed);
  CHECK(*r.failure == LiftFailure::domain_escape);
  CHECK(r.reach > 0.99);
  REQUIRE(r.terminal_iterate);
  CHECK((*r.terminal_iterate - P(2, 0)).norm() < 1e-3);
  REQUIRE(r.cluster_point);
  CHECK(*r.ccp == CcpVerdict::evidence_against);
}

TEST_CASE("sphere: lifting through the antipode stalls at a conjugate point") {
  // From the equator point (1, 0) the antipode is (-1, 0); a path through it
  // forces |v|_h -> pi where sin(t)/t vanishes.
  const auto S = catalog_manifold("sphere2");
  const LiftResult r = lift_path(S, P(1, 0), polyline_path({P(1, 0), P(0, 0.5), P(-1, 0), P(-1.5, -0.5)}), Vector::Zero(2));
  CHECK(r.status == LiftStatus::failed);
  CHECK(*r.failure == LiftFailure::conjugate_singularity);
  CHECK(aux_norm(S, {P(1, 0), r.endpoint_velocity()}) == doctest::Approx(M_PI).epsilon(1e-3));
}

TEST_CASE("causal lift refuses non-causal input and reports cone violations") {
  const auto M = catalog_manifold("minkowski2");
  PathSpec a = segment_path(P(0, 0), P(0.1, 1));
  a.causal_tag = PathCharacter::timelike;
  CHECK_THROWS_AS(causal_lift(M, P(0, 0), a), PreconditionError);
  CHECK_THROWS_AS(causal_lift(catalog_manifold("sphere2"), P(0, 0), segment_path(P(0, 0), P(1, 0))), Error);
}

TEST_CASE("checkpoints make the samples land on k / n") {
  const auto S = catalog_manifold("sphere2");
  LiftOptions o;
  o.checkpoints = 8;
  const LiftResult r = lift_path(S, P(0, 0), segment_path(P(0, 0), P(0.7, 0.2)), Vector::Zero(2), o);
  int hits = 0;
  for (const auto& s : r.lift_samples)
    for (int k = 0; k <= 8; ++k) hits += s.t == k / 8.0;
  CHECK(hits == 9);
}
