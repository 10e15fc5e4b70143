#include "geolift/manifold.hpp"

#include <cmath>
#include <limits>

namespace geolift {

Vector Christoffel::contract(const Vector& a, const Vector& b) const {
  Vector out = Vector::Zero(dim_);
  for (int k = 0; k < dim_; ++k) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      if (a[i] == 0.0) continue;
      for (int j = 0; j < dim_; ++j) s += (*this)(k, i, j) * a[i] * b[j];
    }
    out[k] = s;
  }
  return out;
}

double Christoffel::max_asymmetry() const {
  double worst = 0.0;
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j)
        worst = std::max(worst, std::abs((*this)(k, i, j) - (*this)(k, j, i)));
  return worst;
}

Point ManifoldSpec::wrap(const Point& x) const {
  if (periods.empty()) return x;
  Point y = x;
  for (int i = 0; i < dim; ++i) {
    const double P = periods[static_cast<size_t>(i)];
    if (P > 0.0) y[i] = x[i] - P * std::floor(x[i] / P + 0.5);
  }
  return y;
}

Vector ManifoldSpec::chart_difference(const Point& a, const Point& b) const {
  Vector d = a - b;
  if (periods.empty()) return d;
  for (int i = 0; i < dim; ++i) {
    const double P = periods[static_cast<size_t>(i)];
    if (P > 0.0) d[i] -= P * std::floor(d[i] / P + 0.5);
  }
  return d;
}

bool ManifoldSpec::contains(const Point& x) const {
  if (x.size() != dim || !x.allFinite()) return false;
  const Point y = wrap(x);
  if (domain_predicate && !domain_predicate(y)) return false;
  for (const auto& e : excised_points)
    if ((y - e).norm() == 0.0) return false;
  return true;
}

double ManifoldSpec::clearance(const Point& x) const {
  double c = std::numeric_limits<double>::infinity();
  const Point y = wrap(x);
  if (boundary_distance) c = std::min(c, boundary_distance(y));
  for (const auto& e : excised_points) c = std::min(c, chart_difference(y, e).norm());
  return c;
}

Matrix ManifoldSpec::g(const Point& x) const {
  if (!metric) throw UnsupportedError("manifold '" + id + "' has no metric");
  return metric(wrap(x));
}

Matrix ManifoldSpec::h(const Point& x) const {
  if (aux_metric) return aux_metric(wrap(x));
  return Matrix::Identity(dim, dim);
}

double ManifoldSpec::d_h(const Point& a, const Point& b) const {
  if (distance) return distance(wrap(a), wrap(b));
  return chart_difference(a, b).norm();
}

ChristoffelDerivative ManifoldSpec::christoffel_derivative_at(const Point& x) const {
  if (christoffel_derivative) return christoffel_derivative(x);
  ChristoffelDerivative d(dim);
  for (int l = 0; l < dim; ++l) {
    Point xp = x, xm = x;
    xp[l] += fd_step;
    xm[l] -= fd_step;
    const Christoffel gp = christoffel(xp), gm = christoffel(xm);
    for (int k = 0; k < dim; ++k)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) d(l, k, i, j) = (gp(k, i, j) - gm(k, i, j)) / (2.0 * fd_step);
  }
  return d;
}

double metric_product(const ManifoldSpec& M, const Point& x, const Vector& a, const Vector& b) {
  return a.dot(M.g(x) * b);
}

CausalCharacter causal_character(const ManifoldSpec& M, const TangentVector& v, double tol_causal,
                                 double tol_zero) {
  if (!M.has_metric()) throw UnsupportedError("causal_character: manifold '" + M.id + "' has no metric");
  if (!M.contains(v.base)) throw PreconditionError("causal_character: base point outside the domain");
  const double q = metric_product(M, v.base, v.components, v.components);
  CausalCharacter c;
  if (q < -tol_causal)
    c.tag = CausalTag::timelike;
  else if (std::abs(q) <= tol_causal && aux_norm(M, v) > tol_zero)
    c.tag = CausalTag::null;
  else
    c.tag = CausalTag::spacelike;
  if (c.tag != CausalTag::spacelike && M.time_orientation) {
    const Vector T = M.time_orientation(M.wrap(v.base));
    c.orientation = metric_product(M, v.base, v.components, T) < 0.0 ? TimeOrientation::future
                                                                     : TimeOrientation::past;
  }
  return c;
}

double aux_norm(const ManifoldSpec& M, const TangentVector& v) {
  const double q = v.components.dot(M.h(v.base) * v.components);
  return std::sqrt(std::max(q, 0.0));
}

double levi_civita_residual(const ManifoldSpec& M, const Point& x, double step) {
  const int m = M.dim;
  const Christoffel G = M.christoffel(x);
  const Matrix g0 = M.g(x);
  double worst = 0.0;
  for (int k = 0; k < m; ++k) {
    Point xp = x, xm = x;
    xp[k] += step;
    xm[k] -= step;
    const Matrix dg = (M.g(xp) - M.g(xm)) / (2.0 * step);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double r = dg(i, j);
        for (int l = 0; l < m; ++l) r -= G(l, k, i) * g0(l, j) + G(l, k, j) * g0(i, l);
        worst = std::max(worst, std::abs(r));
      }
  }
  return worst;
}

std::string to_string(CausalTag tag) {
  switch (tag) {
    case CausalTag::timelike: return "timelike";
    case CausalTag::null: return "null";
    case CausalTag::spacelike: return "spacelike";
  }
  return "spacelike";
}

std::string to_string(TimeOrientation o) { return o == TimeOrientation::future ? "future" : "past"; }

}  // namespace geolift
