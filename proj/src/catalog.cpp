#include <cmath>
#include <numbers>
#include <regex>

#include "geolift/manifold.hpp"

namespace geolift {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ManifoldSpec flat(std::string id, int m, Matrix metric, std::optional<Signature> sig) {
  ManifoldSpec M;
  M.id = std::move(id);
  M.dim = m;
  M.christoffel = [m](const Point&) { return Christoffel(m); };
  M.christoffel_derivative = [m](const Point&) { return ChristoffelDerivative(m); };
  M.metric = [metric](const Point&) { return metric; };
  M.signature = sig;
  M.periods.assign(static_cast<size_t>(m), 0.0);
  return M;
}

ManifoldSpec minkowski(std::string id) {
  Matrix eta = Matrix::Identity(2, 2);
  eta(0, 0) = -1.0;
  ManifoldSpec M = flat(std::move(id), 2, eta, Signature::lorentzian);
  M.time_orientation = [](const Point&) { return Vector::Unit(2, 0); };
  return M;
}

// Stereographic chart from the south pole; the north pole sits at the origin
// and the round metric is 4 / (1 + |u|^2)^2 times the chart metric.
ManifoldSpec sphere2() {
  ManifoldSpec M;
  M.id = "sphere2";
  M.dim = 2;
  M.periods = {0.0, 0.0};
  auto conformal = [](const Point& u) {
    const double lam = 2.0 / (1.0 + u.squaredNorm());
    return Matrix(lam * lam * Matrix::Identity(2, 2));
  };
  M.metric = conformal;
  M.aux_metric = conformal;
  M.signature = Signature::riemannian;
  // Gamma^k_ij = delta_ik a_j + delta_jk a_i - delta_ij a_k with a = grad log(lambda).
  M.christoffel = [](const Point& u) {
    const double s = 1.0 + u.squaredNorm();
    const Vector a = -2.0 * u / s;
    Christoffel G(2);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          G(k, i, j) = (i == k ? a[j] : 0.0) + (j == k ? a[i] : 0.0) - (i == j ? a[k] : 0.0);
    return G;
  };
  M.christoffel_derivative = [](const Point& u) {
    const double s = 1.0 + u.squaredNorm();
    Matrix da(2, 2);  // da(i, l) = d_l a_i
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) da(i, l) = (i == l ? -2.0 / s : 0.0) + 4.0 * u[i] * u[l] / (s * s);
    ChristoffelDerivative D(2);
    for (int l = 0; l < 2; ++l)
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            D(l, k, i, j) = (i == k ? da(j, l) : 0.0) + (j == k ? da(i, l) : 0.0) -
                            (i == j ? da(k, l) : 0.0);
    return D;
  };
  M.distance = [](const Point& a, const Point& b) {
    auto embed = [](const Point& u) {
      const double r2 = u.squaredNorm();
      Eigen::Vector3d X(2.0 * u[0], 2.0 * u[1], 1.0 - r2);
      return Eigen::Vector3d(X / (1.0 + r2));
    };
    const double c = std::clamp(embed(a).dot(embed(b)), -1.0, 1.0);
    return std::acos(c);
  };
  // Inversion u -> u / |u|^2 is the reflection through the equator, an
  // isometry of the round metric in this chart.
  ChartInvolution inv;
  inv.trigger = [](const Point& u) { return u.squaredNorm() > 4.0; };
  inv.map = [](const Point& u) { return Point(u / u.squaredNorm()); };
  inv.jacobian = [](const Point& u) {
    const double r2 = u.squaredNorm();
    return Matrix(Matrix::Identity(2, 2) / r2 - 2.0 * u * u.transpose() / (r2 * r2));
  };
  inv.hessian = [](const Point& u) {
    const double r2 = u.squaredNorm();
    std::vector<Matrix> H(2, Matrix::Zero(2, 2));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          double v = -2.0 * ((i == j ? u[k] : 0.0) + (i == k ? u[j] : 0.0) + (j == k ? u[i] : 0.0)) /
                     (r2 * r2);
          v += 8.0 * u[i] * u[j] * u[k] / (r2 * r2 * r2);
          H[static_cast<size_t>(i)](j, k) = v;
        }
    return H;
  };
  M.involution = inv;
  M.multiplicity = MultiplicityMode::conjugate_shells;
  return M;
}

ManifoldSpec desitter2() {
  ManifoldSpec M;
  M.id = "desitter2";
  M.dim = 2;
  M.periods = {0.0, kTwoPi};
  M.signature = Signature::lorentzian;
  M.metric = [](const Point& x) {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = -1.0;
    g(1, 1) = std::cosh(x[0]) * std::cosh(x[0]);
    return g;
  };
  M.christoffel = [](const Point& x) {
    Christoffel G(2);
    G(0, 1, 1) = std::sinh(x[0]) * std::cosh(x[0]);
    G(1, 0, 1) = G(1, 1, 0) = std::tanh(x[0]);
    return G;
  };
  M.christoffel_derivative = [](const Point& x) {
    ChristoffelDerivative D(2);
    const double c = std::cosh(x[0]);
    D(0, 0, 1, 1) = std::cosh(2.0 * x[0]);
    D(0, 1, 0, 1) = D(0, 1, 1, 0) = 1.0 / (c * c);
    return D;
  };
  M.time_orientation = [](const Point&) { return Vector::Unit(2, 0); };
  M.deck_generator = Vector::Unit(2, 1) * kTwoPi;
  M.multiplicity = MultiplicityMode::deck;
  return M;
}

}  // namespace

std::vector<std::string> catalog_ids() {
  return {"euclidean(2)",           "sphere2",  "cylinder_flat",
          "minkowski2",             "minkowski2_minus_point",
          "minkowski2_minus_quadrant", "minkowski2_strip", "desitter2"};
}

ManifoldSpec catalog_manifold(const std::string& id) {
  static const std::regex euclid(R"(euclidean(?:\((\d+)\))?)");
  std::smatch match;
  if (std::regex_match(id, match, euclid)) {
    const int m = match[1].matched ? std::stoi(match[1].str()) : 2;
    if (m < 2) throw ConfigError("euclidean(m) needs m >= 2, got " + std::to_string(m));
    return flat("euclidean(" + std::to_string(m) + ")", m, Matrix::Identity(m, m), Signature::riemannian);
  }
  if (id == "sphere2") return sphere2();
  if (id == "cylinder_flat") {
    ManifoldSpec M = flat(id, 2, Matrix::Identity(2, 2), Signature::riemannian);
    M.periods = {0.0, kTwoPi};
    M.deck_generator = Vector::Unit(2, 1) * kTwoPi;
    M.multiplicity = MultiplicityMode::deck;
    return M;
  }
  if (id == "minkowski2") return minkowski(id);
  if (id == "minkowski2_minus_point") {
    ManifoldSpec M = minkowski(id);
    const Point hole = (Point(2) << 1.0, 0.0).finished();
    M.excised_points = {hole};
    M.fills_chart = false;
    return M;
  }
  if (id == "minkowski2_minus_quadrant") {
    // Removes the closed quadrant {t <= 0, x >= 0}.
    ManifoldSpec M = minkowski(id);
    M.domain_predicate = [](const Point& x) { return !(x[0] <= 0.0 && x[1] >= 0.0); };
    M.boundary_distance = [](const Point& x) {
      if (x[0] <= 0.0 && x[1] >= 0.0) return 0.0;
      const double dt = std::max(x[0], 0.0), dx = std::max(-x[1], 0.0);
      return std::hypot(dt, dx);
    };
    M.fills_chart = false;
    return M;
  }
  if (id == "minkowski2_strip") {
    ManifoldSpec M = minkowski(id);
    M.domain_predicate = [](const Point& x) { return x[1] > 0.0 && x[1] < 1.0; };
    M.boundary_distance = [](const Point& x) { return std::max(0.0, std::min(x[1], 1.0 - x[1])); };
    M.fills_chart = false;
    return M;
  }
  if (id == "desitter2") return desitter2();
  throw ConfigError("unknown catalog manifold '" + id + "'");
}

}  // namespace geolift
