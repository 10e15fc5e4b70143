#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "geolift/geodesic.hpp"
#include "oracles.hpp"

using namespace geolift;

namespace {
Point P(double a, double b) { return (Point(2) << a, b).finished(); }
}  // namespace

TEST_CASE("straight lines in flat space") {
  const auto E = catalog_manifold("euclidean(2)");
  const GeodesicPath g = integrate_geodesic(E, P(0, 0), P(1, 2), 1.0);
  CHECK(g.termination == Termination::reached_target);
  CHECK((g.samples.back().x - P(1, 2)).norm() < 1e-14);
  CHECK(g.samples.back().t == 1.0);
  CHECK((exp_map(E, P(0, 0), P(1, 2)) - P(1, 2)).norm() < 1e-14);
}

TEST_CASE("zero velocity gives the constant geodesic") {
  for (const auto& id : catalog_ids()) {
    const auto M = catalog_manifold(id);
    const Point p = id == "minkowski2_strip" ? P(0, 0.5) : id == "minkowski2_minus_quadrant" ? P(1, -1) : P(0.2, 0.1);
    CHECK((exp_map(M, p, Vector::Zero(2)) - p).norm() == 0.0);
  }
}

TEST_CASE("sphere great circles") {
  const auto S = catalog_manifold("sphere2");
  SUBCASE("closed great circle from the north pole") {
    // chart speed 0.5 at the origin is unit h-speed
    const GeodesicPath g = integrate_geodesic(S, P(0, 0), P(0.5, 0), 2.0 * M_PI);
    CHECK(g.termination == Termination::reached_target);
    CHECK((g.samples.back().x - P(0, 0)).norm() < 1e-6);
  }
  SUBCASE("random base points against the embedding") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
      const Point p = oracle::uniform(rng, 2, -1.0, 1.0);
      const Vector v = oracle::uniform(rng, 2, -1.5, 1.5);
      const Point x = exp_map(S, p, v);
      CHECK((oracle::sphere_embed(x) - oracle::great_circle(p, v, 1.0)).norm() < 1e-7);
    }
  }
  SUBCASE("through the chart's point at infinity") {
    // from the north pole, |v|_h = 3 passes close to the south pole
    const Point x = exp_map(S, P(0, 0), P(1.5, 0));
    CHECK((oracle::sphere_embed(x) - oracle::great_circle(P(0, 0), P(1.5, 0), 1.0)).norm() < 1e-7);
    const Point y = exp_map(S, P(0, 0), P(2.0, 1.0));
    CHECK((oracle::sphere_embed(y) - oracle::great_circle(P(0, 0), P(2.0, 1.0), 1.0)).norm() < 1e-7);
  }
}

TEST_CASE("homogeneity and reversibility") {
  std::mt19937_64 rng(9);
  for (const char* id : {"sphere2", "desitter2", "cylinder_flat"}) {
    const auto M = catalog_manifold(id);
    for (int i = 0; i < 5; ++i) {
      const Point p = oracle::uniform(rng, 2, -0.5, 0.5);
      const Vector v = oracle::uniform(rng, 2, -0.8, 0.8);
      CAPTURE(id);
      // gamma_{2v}(1/2) = gamma_v(1)
      const GeodesicPath half = integrate_geodesic(M, p, 2.0 * v, 0.5);
      CHECK(M.chart_difference(half.samples.back().x, exp_map(M, p, v)).norm() < 1e-8);
      // running back from the endpoint returns to p
      const GeodesicPath fwd = integrate_geodesic(M, p, v, 1.0);
      const GeodesicPath back = integrate_geodesic(M, fwd.samples.back().x, -fwd.samples.back().xdot, 1.0);
      CHECK(M.chart_difference(back.samples.back().x, p).norm() < 1e-8);
    }
  }
}

TEST_CASE("metric conservation along geodesics") {
  for (const char* id : {"sphere2", "desitter2"}) {
    const auto M = catalog_manifold(id);
    const Point p = P(0.3, 0.2);
    const Vector v = P(0.9, 0.4);
    const double g0 = metric_product(M, p, v, v);
    const GeodesicPath g = integrate_geodesic(M, p, v, 3.0);
    for (const auto& s : g.samples) CHECK(metric_product(M, s.x, s.xdot, s.xdot) == doctest::Approx(g0).epsilon(1e-8));
  }
}

TEST_CASE("domain escapes") {
  SUBCASE("minus point: the removed point is hit at t = 1") {
    const auto M = catalog_manifold("minkowski2_minus_point");
    const GeodesicPath g = integrate_geodesic(M, P(0, 0), P(1, 0), 2.0);
    CHECK(g.termination == Termination::domain_escape);
    CHECK(g.t_end == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(exp_map(M, P(0, 0), P(2, 0)), DomainEscapeError);
  }
  SUBCASE("strip: exits x < 1 at t = 0.5") {
    const auto M = catalog_manifold("minkowski2_strip");
    try {
      exp_map(M, P(0, 0.5), P(0, 1));
      FAIL("expected a domain escape");
    } catch (const DomainEscapeError& e) {
      CHECK(e.reason() == Termination::domain_escape);
      CHECK(e.partial().t_end == doctest::Approx(0.5).epsilon(1e-6));
    }
  }
  SUBCASE("base point outside M") {
    CHECK_THROWS_AS(integrate_geodesic(catalog_manifold("minkowski2_strip"), P(0, 2), P(1, 0), 1.0), PreconditionError);
  }
}

TEST_CASE("maximal interval estimates") {
  const auto E = catalog_manifold("euclidean(2)");
  MaximalInterval J = maximal_interval(E, {P(0, 0), P(0.6, 0.8)}, 10.0);
  CHECK(J.a_est == -10.0);
  CHECK(J.b_est == 10.0);
  CHECK_FALSE(J.a_is_escape);
  CHECK_FALSE(J.b_is_escape);

  J = maximal_interval(catalog_manifold("minkowski2_minus_point"), {P(0, 0), P(1, 0)}, 10.0);
  CHECK(J.b_est == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(J.b_is_escape);
  CHECK_FALSE(J.a_is_escape);

  J = maximal_interval(catalog_manifold("minkowski2_strip"), {P(0, 0.5), P(0, 1)}, 10.0);
  CHECK(J.b_est == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(J.a_est == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(J.a_is_escape);
  CHECK(J.b_is_escape);
}

TEST_CASE("de Sitter: meridians are timelike geodesics, the waist is spacelike") {
  const auto D = catalog_manifold("desitter2");
  const GeodesicPath g = integrate_geodesic(D, P(0, 0.3), P(2.0, 0), 1.0);
  CHECK((g.samples.back().x - P(2.0, 0.3)).norm() < 1e-8);
  const Point y = exp_map(D, P(0, 0.3), P(0, 1.7));
  CHECK(D.chart_difference(y, oracle::desitter_equator(0.3, 1.7, 1.0)).norm() < 1e-8);
}

TEST_CASE("invalid integrator options") {
  IntegratorOptions o;
  o.rel_tol = -1;
  CHECK_THROWS_AS(o.validate(), ConfigError);
}
