#include "geolift/lifting.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace geolift {

void LiftOptions::validate() const {
  integrator.validate();
  if (!(lift_tol > 0.0 && dt_max > 0.0 && dt_min > 0.0 && dt_min < dt_max))
    throw ConfigError("lift options: need lift_tol > 0 and 0 < dt_min < dt_max");
  if (max_newton < 1 || hard_newton < 1 || easy_newton < 1) throw ConfigError("lift options: Newton limits must be positive");
  if (checkpoints < 0) throw ConfigError("lift options: checkpoints must be nonnegative");
}

std::string to_string(LiftStatus s) { return s == LiftStatus::complete ? "complete" : "failed"; }

std::string to_string(LiftFailure f) {
  switch (f) {
    case LiftFailure::conjugate_singularity: return "conjugate_singularity";
    case LiftFailure::domain_escape: return "domain_escape";
    case LiftFailure::step_collapse: return "step_collapse";
    case LiftFailure::residual_divergence: return "residual_divergence";
  }
  return "step_collapse";
}

std::string to_string(CcpVerdict v) {
  switch (v) {
    case CcpVerdict::evidence_for: return "evidence-for";
    case CcpVerdict::evidence_against: return "evidence-against";
    case CcpVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

LiftStatus lift_status_from_string(const std::string& s) {
  if (s == "complete") return LiftStatus::complete;
  if (s == "failed") return LiftStatus::failed;
  throw ConfigError("unknown lift status '" + s + "'");
}

LiftFailure lift_failure_from_string(const std::string& s) {
  for (auto f : {LiftFailure::conjugate_singularity, LiftFailure::domain_escape, LiftFailure::step_collapse,
                 LiftFailure::residual_divergence})
    if (to_string(f) == s) return f;
  throw ConfigError("unknown lift failure '" + s + "'");
}

CcpVerdict ccp_verdict_from_string(const std::string& s) {
  for (auto v : {CcpVerdict::evidence_for, CcpVerdict::evidence_against, CcpVerdict::inconclusive})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown CCP verdict '" + s + "'");
}

namespace {

enum class AttemptFailure { none, escape, divergence, singular, det_drop };

struct Attempt {
  AttemptFailure failure = AttemptFailure::none;
  Vector v;
  DexpMatrix D;
  double residual = 0.0;
  int iterations = 0;
  Termination termination = Termination::reached_target;
};

class Lifter {
 public:
  Lifter(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const LiftOptions& opts)
      : M_(M), p_(p), alpha_(alpha), opts_(opts) {}

  struct Eval {
    bool ok = false;
    Vector w;
    DexpMatrix D;
    Vector r;
    double rn = 0.0;
    Termination termination = Termination::reached_target;
  };

  Eval evaluate(const Vector& w, const Point& target) const {
    Eval e;
    e.w = w;
    try {
      e.D = dexp(M_, p_, w, opts_.integrator);
    } catch (const DomainEscapeError& err) {
      e.termination = err.reason();
      return e;
    }
    e.ok = true;
    e.r = M_.chart_difference(target, e.D.endpoint);
    e.rn = e.r.norm();
    return e;
  }

  // Damped Newton on exp_p(w) = alpha(t) from the predictor w, with a
  // backtracking line search on the residual norm.
  Attempt correct(const Vector& pred, double t) const {
    const Point target = alpha_.eval(t);
    const double goal = 0.1 * opts_.lift_tol;
    Attempt a;
    Eval cur = evaluate(pred, target);
    if (!cur.ok) {
      a.failure = AttemptFailure::escape;
      a.termination = cur.termination;
      a.v = pred;
      return a;
    }
    for (int it = 0; it <= opts_.max_newton; ++it) {
      a.v = cur.w;
      a.D = cur.D;
      a.residual = cur.rn;
      a.iterations = it;
      if (cur.rn <= goal) return a;
      Eigen::FullPivLU<Matrix> lu(cur.D.matrix);
      if (!lu.isInvertible()) {
        a.failure = AttemptFailure::singular;
        return a;
      }
      const Vector delta = lu.solve(cur.r);
      double lambda = 1.0;
      Eval next;
      for (int damp = 0; damp < 8; ++damp, lambda *= 0.5) {
        next = evaluate(cur.w + lambda * delta, target);
        if (next.ok && next.rn < cur.rn) break;
      }
      if (!next.ok) {
        a.failure = AttemptFailure::escape;
        a.termination = next.termination;
        a.v = next.w;
        return a;
      }
      if (next.rn >= cur.rn) {
        a.failure = AttemptFailure::divergence;
        return a;
      }
      cur = std::move(next);
    }
    a.failure = AttemptFailure::divergence;
    return a;
  }

  LiftResult run(const Vector& v0) const {
    opts_.validate();
    if (!M_.contains(p_)) throw PreconditionError("lift: base point outside the domain");
    DexpMatrix D0;
    try {
      D0 = dexp(M_, p_, v0, opts_.integrator);
    } catch (const DomainEscapeError&) {
      throw PreconditionError("lift: v0 is outside D_p");
    }
    const double r0 = M_.chart_difference(alpha_.eval(0.0), D0.endpoint).norm();
    if (r0 > opts_.lift_tol) {
      std::ostringstream os;
      os << "lift: exp_p(v0) misses alpha(0) by " << r0;
      throw PreconditionError(os.str());
    }

    std::vector<double> stops = alpha_.breaks;
    for (int k = 1; k < opts_.checkpoints; ++k) stops.push_back(static_cast<double>(k) / opts_.checkpoints);
    std::sort(stops.begin(), stops.end());

    LiftResult res;
    res.p = p_;
    res.lift_samples.push_back({0.0, v0, r0, D0.frame_det});
    double t = 0.0, dt = opts_.dt_max;
    Vector v = v0;
    DexpMatrix D = D0;
    double det_max = std::abs(D0.frame_det);
    int easy = 0;
    Attempt last_fail;
    bool any_fail = false;

    while (t < 1.0) {
      double t_next = std::min(1.0, t + dt);
      auto it = std::upper_bound(stops.begin(), stops.end(), t + 1e-15);
      if (it != stops.end() && *it < t_next) t_next = *it;
      const double h = t_next - t;

      Vector pred = v;
      Eigen::FullPivLU<Matrix> lu(D.matrix);
      if (lu.isInvertible()) pred += h * lu.solve(alpha_.eval_dot(t));
      Attempt a = correct(pred, t_next);
      if (a.failure == AttemptFailure::none) {
        const double det = std::abs(a.D.frame_det);
        const double prev_det = std::abs(D.frame_det);
        if (det < opts_.singular_ratio * det_max || det < 0.1 * prev_det) a.failure = AttemptFailure::det_drop;
      }

      if (a.failure == AttemptFailure::none) {
        t = t_next;
        v = a.v;
        D = a.D;
        det_max = std::max(det_max, std::abs(D.frame_det));
        res.lift_samples.push_back({t, v, a.residual, D.frame_det});
        any_fail = false;
        if (a.iterations > opts_.hard_newton) {
          dt *= 0.5;
          easy = 0;
        } else if (a.iterations <= opts_.easy_newton && ++easy >= 3) {
          dt = std::min(2.0 * dt, opts_.dt_max);
          easy = 0;
        }
        continue;
      }

      last_fail = a;
      any_fail = true;
      easy = 0;
      dt *= 0.5;
      if (dt < opts_.dt_min) break;
    }

    res.reach = t;
    if (t >= 1.0) {
      res.status = LiftStatus::complete;
      return res;
    }

    res.status = LiftStatus::failed;
    res.terminal_iterate = any_fail && last_fail.v.size() > 0 ? last_fail.v : v;
    double det_ratio = std::abs(D.frame_det) / det_max;
    if (last_fail.failure == AttemptFailure::det_drop || last_fail.failure == AttemptFailure::singular)
      det_ratio = std::min(det_ratio, last_fail.failure == AttemptFailure::singular
                                          ? 0.0
                                          : std::abs(last_fail.D.frame_det) / det_max);
    res.stall_det_ratio = det_ratio;
    if (last_fail.failure == AttemptFailure::escape) {
      res.failure = LiftFailure::domain_escape;
      res.stall_termination = last_fail.termination;
    } else if (det_ratio < opts_.conjugate_ratio) {
      res.failure = LiftFailure::conjugate_singularity;
    } else if (last_fail.failure == AttemptFailure::divergence) {
      res.failure = LiftFailure::residual_divergence;
    } else {
      res.failure = LiftFailure::step_collapse;
    }

    const auto& s = res.lift_samples;
    if (s.size() >= 3) {
      const Vector& last = s.back().v;
      bool clustered = true;
      for (size_t i = s.size() - 3; i < s.size(); ++i)
        clustered = clustered && aux_norm(M_, {p_, s[i].v - last}) <= opts_.cluster_radius;
      if (clustered) res.cluster_point = TangentVector{p_, last};
    }
    return res;
  }

 private:
  const ManifoldSpec& M_;
  Point p_;
  const PathSpec& alpha_;
  const LiftOptions& opts_;
};

}  // namespace

LiftResult lift_path(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const Vector& v0,
                     const LiftOptions& opts) {
  if (p.size() != M.dim || v0.size() != M.dim) throw PreconditionError("lift: dimension mismatch");
  return Lifter(M, p, alpha, opts).run(v0);
}

LiftResult causal_lift(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const LiftOptions& opts) {
  if (!M.is_lorentzian() || !M.time_orientation) throw UnsupportedError("causal_lift needs a time-oriented spacetime");
  if (!alpha.causal_tag) throw PreconditionError("causal_lift: path carries no causal tag");
  if (M.chart_difference(alpha.eval(0.0), p).norm() > opts.lift_tol)
    throw PreconditionError("causal_lift: path does not start at p");
  validate_path(M, alpha, 256, opts.tol_causal);

  LiftResult res = lift_path(M, p, alpha, Vector::Zero(M.dim), opts);
  std::optional<TimeOrientation> cone;
  for (const auto& s : res.lift_samples) {
    if (s.t == 0.0) continue;
    const CausalCharacter ch = causal_character(M, {p, s.v}, opts.tol_causal);
    const bool in_cone = *alpha.causal_tag == PathCharacter::timelike ? ch.tag == CausalTag::timelike
                                                                      : ch.tag != CausalTag::spacelike;
    if (!cone) cone = ch.orientation;
    if (!in_cone || ch.orientation != cone) {
      std::ostringstream os;
      os.precision(17);
      os << "causal_lift: lifted velocity left the " << (*alpha.causal_tag == PathCharacter::timelike ? "timecone" : "causal cone")
         << " at t = " << s.t << ", v = (";
      for (Eigen::Index i = 0; i < s.v.size(); ++i) os << (i ? ", " : "") << s.v[i];
      os << "), tag " << to_string(ch.tag);
      throw InvariantBreach(os.str());
    }
  }
  if (res.status == LiftStatus::complete)
    res.ccp = CcpVerdict::evidence_for;
  else if (res.cluster_point && res.failure == LiftFailure::domain_escape)
    res.ccp = CcpVerdict::evidence_against;
  else
    res.ccp = CcpVerdict::inconclusive;
  return res;
}

}  // namespace geolift
