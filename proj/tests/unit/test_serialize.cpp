#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "geolift/serialize.hpp"

#include <limits>

using namespace geolift;

namespace {
Point P(double a, double b) { return (Point(2) << a, b).finished(); }

template <class T>
T round_trip(const T& x) {
  return json::parse(json(x).dump()).get<T>();
}
}  // namespace

TEST_CASE("numbers") {
  CHECK(number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(number(std::nan("")) == "nan");
  CHECK(std::isinf(number_from(json("inf"))));
  const double x = 0.1 + 0.2;
  CHECK(number_from(json::parse(number(x).dump())) == x);
}

TEST_CASE("geodesic and dexp round trips") {
  const auto S = catalog_manifold("sphere2");
  const GeodesicPath g = integrate_geodesic(S, P(0.1, 0.2), P(0.7, -0.3), 2.0);
  const GeodesicPath g2 = round_trip(g);
  REQUIRE(g2.samples.size() == g.samples.size());
  for (size_t i = 0; i < g.samples.size(); ++i) {
    CHECK(g2.samples[i].t == g.samples[i].t);
    CHECK(g2.samples[i].x == g.samples[i].x);
    CHECK(g2.samples[i].xdot == g.samples[i].xdot);
  }
  CHECK(g2.termination == g.termination);
  CHECK(json(g2) == json(g));

  const DexpMatrix d = dexp(S, P(0.1, 0.2), P(0.7, -0.3));
  CHECK(json(round_trip(d)) == json(d));
}

TEST_CASE("lift, connection, homotopy and probe round trips") {
  const auto M = catalog_manifold("minkowski2_minus_point");
  PathSpec a = function_path([](double t) -> Point { return P(2 * t, 0.2 * std::sin(M_PI * t)); },
                             [](double t) -> Vector { return P(2, 0.2 * M_PI * std::cos(M_PI * t)); });
  a.causal_tag = PathCharacter::timelike;
  const LiftResult l = causal_lift(M, P(0, 0), a);
  CHECK(json(round_trip(l)) == json(l));
  CHECK(json(without_trace(l))["lift_samples"].size() == 2);

  const ConnectionResult c = enumerate_multiplicity(catalog_manifold("cylinder_flat"), P(0, 0), P(1, 1), 2);
  CHECK(json(round_trip(c)) == json(c));

  const auto F = catalog_manifold("minkowski2");
  const LiftResult fl = causal_lift(F, P(0, 0), a);
  const HomotopyGrid G = straighten_homotopy(F, P(0, 0), a, fl, 5, 5);
  CHECK(json(round_trip(G)) == json(G));

  const ProbeReport r = imprisonment_scan(catalog_manifold("cylinder_flat"), {ConeKind::at_point, P(0, 0)}, 4, 8, 4);
  CHECK(json(round_trip(r)) == json(r));
}

TEST_CASE("plot projections") {
  const auto S = catalog_manifold("sphere2");
  const ConjugateReport r = conjugate_scan(S, P(0, 0), {P(0, 0), P(0.5, 0)}, 4.0, 10);
  const json report = {{"kind", "conjugate_scan"}, {"result", r}};
  const std::string csv = plot_csv(report, "det");
  CHECK(csv.rfind("t,det\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(r.det_samples.size()));
  CHECK_THROWS_AS(plot_csv(report, "homotopy"), ConfigError);
}
