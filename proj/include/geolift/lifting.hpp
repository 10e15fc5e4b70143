#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geolift/jacobi.hpp"
#include "geolift/path.hpp"

namespace geolift {

struct LiftOptions {
  IntegratorOptions integrator;
  double lift_tol = 1e-7;
  double dt_max = 0.05;
  double dt_min = 1e-9;
  int max_newton = 20;
  /// Newton counts above this halve the step.
  int hard_newton = 8;
  /// A step is easy when Newton needs at most this many iterations.
  int easy_newton = 3;
  /// Accepted samples need |det| >= singular_ratio * running max.
  double singular_ratio = 1e-7;
  /// Stalls with |det| / running max below this are conjugate stalls.
  double conjugate_ratio = 1e-4;
  double cluster_radius = 1e-4;
  /// When positive, steps land on every t = k / checkpoints.
  int checkpoints = 0;
  double tol_causal = kDefaultTolCausal;

  void validate() const;
};

enum class LiftStatus { complete, failed };
enum class LiftFailure { conjugate_singularity, domain_escape, step_collapse, residual_divergence };
enum class CcpVerdict { evidence_for, evidence_against, inconclusive };

std::string to_string(LiftStatus s);
std::string to_string(LiftFailure f);
std::string to_string(CcpVerdict v);
LiftStatus lift_status_from_string(const std::string& s);
LiftFailure lift_failure_from_string(const std::string& s);
CcpVerdict ccp_verdict_from_string(const std::string& s);

struct LiftSample {
  double t = 0.0;
  Vector v;
  double residual = 0.0;
  double det = 1.0;
};

struct LiftResult {
  Point p;
  LiftStatus status = LiftStatus::complete;
  std::vector<LiftSample> lift_samples;
  double reach = 0.0;
  std::optional<LiftFailure> failure;
  std::optional<TangentVector> cluster_point;
  /// Last Newton iterate tried before the stall (equals the last sample when
  /// the stall came from step control alone).
  std::optional<Vector> terminal_iterate;
  /// |det| / running max at the stall.
  double stall_det_ratio = 1.0;
  /// Termination of the base geodesic in the last failed attempt.
  std::optional<Termination> stall_termination;
  /// Set by causal_lift.
  std::optional<CcpVerdict> ccp;

  const Vector& endpoint_velocity() const { return lift_samples.back().v; }
};

/// Lifts alpha through exp_p starting at v0. Throws PreconditionError when
/// exp_p(v0) does not match alpha(0) to lift_tol.
LiftResult lift_path(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const Vector& v0,
                     const LiftOptions& opts = {});

/// Lift from 0_p of a causal path starting at p, with every lifted velocity
/// checked to stay in the causal cone (and in one timecone for timelike
/// paths). A violation throws InvariantBreach.
LiftResult causal_lift(const ManifoldSpec& M, const Point& p, const PathSpec& alpha, const LiftOptions& opts = {});

}  // namespace geolift
