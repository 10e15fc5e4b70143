#include "flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geolift::detail {
namespace {

// Dormand-Prince 5(4) tableau. The flow is autonomous, so the nodes c_i are unused.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 - -92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

constexpr double kOverflow = 1e8;
constexpr double kGolden = 0.6180339887498949;

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(b)); }

}  // namespace

GeodesicFlow::GeodesicFlow(const ManifoldSpec& M, const IntegratorOptions& opts, bool variational)
    : M_(M), opts_(opts), variational_(variational), m_(M.dim) {}

FlowState GeodesicFlow::initial(const Point& p, const Vector& v) const {
  FlowState s;
  s.x = p;
  s.u = v;
  if (variational_) {
    s.X = Matrix::Zero(m_, m_);
    s.U = Matrix::Identity(m_, m_);
  }
  maybe_switch_chart(s);
  return s;
}

GeodesicFlow::State GeodesicFlow::pack(const FlowState& s) const {
  const int n = variational_ ? 2 * m_ + 2 * m_ * m_ : 2 * m_;
  State y(n);
  y.head(m_) = s.x;
  y.segment(m_, m_) = s.u;
  if (variational_) {
    y.segment(2 * m_, m_ * m_) = Eigen::Map<const Vector>(s.X.data(), m_ * m_);
    y.segment(2 * m_ + m_ * m_, m_ * m_) = Eigen::Map<const Vector>(s.U.data(), m_ * m_);
  }
  return y;
}

void GeodesicFlow::unpack(const State& y, FlowState& s) const {
  s.x = y.head(m_);
  s.u = y.segment(m_, m_);
  if (variational_) {
    s.X = Eigen::Map<const Matrix>(y.data() + 2 * m_, m_, m_);
    s.U = Eigen::Map<const Matrix>(y.data() + 2 * m_ + m_ * m_, m_, m_);
  }
}

GeodesicFlow::State GeodesicFlow::rhs(const State& y) const {
  State dy(y.size());
  const Vector x = y.head(m_);
  const Vector u = y.segment(m_, m_);
  const Christoffel G = M_.christoffel(x);
  dy.head(m_) = u;
  dy.segment(m_, m_) = -G.contract(u, u);
  if (variational_) {
    const ChristoffelDerivative D = M_.christoffel_derivative_at(x);
    // Q^k_l = d_l Gamma^k_ij u^i u^j
    Matrix Q = Matrix::Zero(m_, m_);
    for (int l = 0; l < m_; ++l)
      for (int k = 0; k < m_; ++k) {
        double s = 0.0;
        for (int i = 0; i < m_; ++i)
          for (int j = 0; j < m_; ++j) s += D(l, k, i, j) * u[i] * u[j];
        Q(k, l) = s;
      }
    // S^k_j = 2 Gamma^k_ij u^i
    Matrix S = Matrix::Zero(m_, m_);
    for (int k = 0; k < m_; ++k)
      for (int j = 0; j < m_; ++j) {
        double s = 0.0;
        for (int i = 0; i < m_; ++i) s += G(k, i, j) * u[i];
        S(k, j) = 2.0 * s;
      }
    const Eigen::Map<const Matrix> X(y.data() + 2 * m_, m_, m_);
    const Eigen::Map<const Matrix> U(y.data() + 2 * m_ + m_ * m_, m_, m_);
    Eigen::Map<Matrix>(dy.data() + 2 * m_, m_, m_) = U;
    Eigen::Map<Matrix>(dy.data() + 2 * m_ + m_ * m_, m_, m_) = -Q * X - S * U;
  }
  return dy;
}

GeodesicFlow::State GeodesicFlow::rk_step(const State& y, const State& k1, double h, State& err,
                                          State& k7) const {
  const State k2 = rhs(y + h * a21 * k1);
  const State k3 = rhs(y + h * (a31 * k1 + a32 * k2));
  const State k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const State k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const State k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  State y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  k7 = rhs(y1);
  err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return y1;
}

double GeodesicFlow::error_norm(const State& y0, const State& y1, const State& err) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double scale = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

FlowState GeodesicFlow::step(const FlowState& s, double h) const {
  if (h == 0.0) return s;
  const State y = pack(s);
  State err, k7;
  const State y1 = rk_step(y, rhs(y), h, err, k7);
  FlowState out = s;
  out.t = s.t + h;
  unpack(y1, out);
  return out;
}

Point GeodesicFlow::hermite(const FlowState& a, const FlowState& b, double h, double theta) const {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta, h01 = -2 * t3 + 3 * t2,
               h11 = t3 - t2;
  return h00 * a.x + h10 * h * a.u + h01 * b.x + h11 * h * b.u;
}

bool GeodesicFlow::violates(const FlowState& s) const {
  if (M_.fills_chart || s.sheet != 0) return false;
  const Point y = M_.wrap(s.x);
  if (M_.domain_predicate && !M_.domain_predicate(y)) return true;
  for (const auto& e : M_.excised_points)
    if (M_.chart_difference(y, e).norm() < opts_.domain_margin) return true;
  return false;
}

double GeodesicFlow::first_violation(const FlowState& s0, const FlowState& s1, double h) const {
  if (M_.fills_chart || s0.sheet != 0) return -1.0;
  double bad = 2.0;
  if (M_.domain_predicate) {
    constexpr int n = 8;
    for (int k = 1; k <= n; ++k) {
      const double th = static_cast<double>(k) / n;
      if (!M_.domain_predicate(M_.wrap(hermite(s0, s1, h, th)))) {
        bad = th;
        break;
      }
    }
  }
  for (const auto& e : M_.excised_points) {
    auto dist = [&](double th) { return M_.chart_difference(hermite(s0, s1, h, th), e).norm(); };
    constexpr int n = 16;
    int best = 0;
    double best_d = dist(0.0);
    for (int k = 1; k <= n; ++k) {
      const double d = dist(static_cast<double>(k) / n);
      if (d < best_d) best_d = d, best = k;
    }
    double lo = std::max(0, best - 1) / double(n), hi = std::min(n, best + 1) / double(n);
    double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
    double f1 = dist(x1), f2 = dist(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
      if (f1 < f2) {
        hi = x2, x2 = x1, f2 = f1;
        x1 = hi - kGolden * (hi - lo);
        f1 = dist(x1);
      } else {
        lo = x1, x1 = x2, f1 = f2;
        x2 = lo + kGolden * (hi - lo);
        f2 = dist(x2);
      }
    }
    const double th_min = 0.5 * (lo + hi);
    if (std::min(best_d, dist(th_min)) >= opts_.domain_margin) continue;
    double a = 0.0, b = best_d < dist(th_min) ? best / double(n) : th_min;
    if (dist(a) < opts_.domain_margin) {
      bad = std::min(bad, 0.0);
      continue;
    }
    for (int it = 0; it < 100 && b - a > 1e-16; ++it) {
      const double mid = 0.5 * (a + b);
      (dist(mid) < opts_.domain_margin ? b : a) = mid;
    }
    bad = std::min(bad, b);
  }
  return bad <= 1.0 ? bad : -1.0;
}

void GeodesicFlow::maybe_switch_chart(FlowState& s) const {
  if (!M_.involution || !M_.involution->trigger(s.x)) return;
  const auto& inv = *M_.involution;
  const Matrix A = inv.jacobian(s.x);
  if (s.tracks_variation()) {
    const std::vector<Matrix> H = inv.hessian(s.x);
    Matrix dU = A * s.U;
    for (int c = 0; c < m_; ++c)
      for (int i = 0; i < m_; ++i) dU(i, c) += s.X.col(c).dot(H[static_cast<size_t>(i)] * s.u);
    s.X = A * s.X;
    s.U = dU;
  }
  s.u = A * s.u;
  s.x = inv.map(s.x);
  s.sheet ^= 1;
  if (A.determinant() < 0.0) s.orientation = -s.orientation;
}

FlowRun GeodesicFlow::run(const FlowState& start, double t_max, std::span<const double> t_eval) const {
  FlowRun out;
  out.states.push_back(start);
  const double t_end = start.t + t_max;
  if (t_max <= 0.0) return out;

  auto speed = [](const FlowState& s) { return s.u.lpNorm<Eigen::Infinity>(); };
  if (speed(start) == 0.0) {
    // Constant geodesic; the variational part is linear and exact in one step.
    FlowState s = start;
    s.t = t_end;
    if (s.tracks_variation()) s.X = start.X + t_max * start.U;
    for (double te : t_eval) {
      FlowState e = start;
      e.t = start.t + te;
      if (e.tracks_variation()) e.X = start.X + te * start.U;
      if (te < t_max) out.states.push_back(e);
    }
    out.states.push_back(s);
    return out;
  }

  size_t next_eval = 0;
  FlowState cur = start;
  double h = std::min(t_max, 0.1 / speed(start));
  const bool capped = !M_.fills_chart;
  int steps = 0;
  while (true) {
    while (next_eval < t_eval.size() && start.t + t_eval[next_eval] <= cur.t + 1e-15) ++next_eval;
    double target = t_end;
    if (next_eval < t_eval.size()) target = std::min(target, start.t + t_eval[next_eval]);
    const double remaining = target - cur.t;
    if (capped && cur.sheet == 0) h = std::min(h, opts_.max_chart_step / std::max(cur.u.norm(), 1e-300));
    bool lands = false;
    if (h >= remaining) {
      h = remaining;
      lands = true;
    }
    if (h < opts_.min_step && !lands) {
      out.termination = Termination::step_collapse;
      return out;
    }
    if (++steps > opts_.max_steps) {
      out.termination = Termination::step_collapse;
      return out;
    }
    const State y0 = pack(cur);
    State err, k7;
    const State y1 = rk_step(y0, rhs(y0), h, err, k7);
    if (!y1.allFinite()) {
      h *= 0.25;
      if (h < opts_.min_step) {
        out.termination = Termination::blow_up;
        return out;
      }
      continue;
    }
    const double en = error_norm(y0, y1, err);
    if (en > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      continue;
    }
    FlowState nxt = cur;
    nxt.t = lands ? target : cur.t + h;
    unpack(y1, nxt);
    if (nxt.x.lpNorm<Eigen::Infinity>() > kOverflow || nxt.u.lpNorm<Eigen::Infinity>() > kOverflow) {
      out.termination = Termination::blow_up;
      return out;
    }
    const double theta_bad = first_violation(cur, nxt, h);
    if (theta_bad >= 0.0) {
      double lo = 0.0, hi = theta_bad;
      if (M_.excised_points.empty()) {
        while ((hi - lo) * h > opts_.domain_margin && hi - lo > 1e-16) {
          const double mid = 0.5 * (lo + hi);
          (violates(step(cur, mid * h)) ? hi : lo) = mid;
        }
      } else {
        lo = std::max(0.0, theta_bad - 1e-9);
        while (lo > 0.0 && violates(step(cur, lo * h))) lo *= 0.5;
      }
      if (lo > 0.0) {
        FlowState good = step(cur, lo * h);
        maybe_switch_chart(good);
        out.states.push_back(good);
      }
      out.termination = Termination::domain_escape;
      return out;
    }
    maybe_switch_chart(nxt);
    out.states.push_back(nxt);
    cur = nxt;
    if (close_to(cur.t, t_end) || cur.t >= t_end) {
      out.states.back().t = t_end;
      out.termination = Termination::reached_target;
      return out;
    }
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.2)));
  }
}

FlowState GeodesicFlow::at(const FlowRun& r, double t) const {
  auto it = std::upper_bound(r.states.begin(), r.states.end(), t,
                             [](double v, const FlowState& s) { return v < s.t; });
  if (it == r.states.begin()) return r.states.front();
  const FlowState& s = *(it - 1);
  if (s.t == t) return s;
  return step(s, t - s.t);
}

Point GeodesicFlow::primary_point(const FlowState& s) const {
  if (s.sheet == 0) return M_.wrap(s.x);
  return M_.wrap(M_.involution->map(s.x));
}

Vector GeodesicFlow::primary_velocity(const FlowState& s) const {
  if (s.sheet == 0) return s.u;
  return M_.involution->jacobian(s.x) * s.u;
}

Matrix GeodesicFlow::primary_variation(const FlowState& s) const {
  if (s.sheet == 0) return s.X;
  return M_.involution->jacobian(s.x) * s.X;
}

double GeodesicFlow::frame_det(const FlowState& s, const Point& base) const {
  const double vol = std::sqrt(std::abs(M_.h(s.x).determinant() / M_.h(base).determinant()));
  return s.orientation * s.X.determinant() * vol;
}

GeodesicPath to_path(const GeodesicFlow& flow, const FlowRun& run, const Point& p, const Vector& v) {
  GeodesicPath path;
  path.initial = {p, v};
  path.samples.reserve(run.states.size());
  for (const auto& s : run.states)
    path.samples.push_back({s.t, flow.primary_point(s), flow.primary_velocity(s)});
  path.t_end = run.states.back().t;
  path.termination = run.termination;
  path.periods = flow.manifold().periods;
  return path;
}

}  // namespace geolift::detail
