#pragma once

#include <functional>
#include <string>

#include "plap/barrier.hpp"

namespace plap {

enum class Stage { aux, main };

/// One line of progress: emitted after every Newton step and whenever a
/// path point is accepted as centered.
struct StepRecord {
  Stage stage = Stage::main;
  int iteration = 0;  // total Newton steps so far
  double t = 0.0;
  double lambda = 0.0;
  double step = 0.0;
  double min_z = 0.0;
  double min_tau = 0.0;
  double min_s = 0.0;
  double cost = 0.0;     // <c, x>
  bool centered = false;
  int restart = 0;
};

/// key=value rendering of a StepRecord.
std::string format_step(const StepRecord& rec);

struct SolverConfig {
  double eps = 1e-6;
  double beta_center = 0.25;
  /// Initial path step: t <- t (1 + gamma / sqrt(nu)).
  double gamma0 = 1.0 / 16.0;
  double gamma_grow = 2.0;
  double gamma_shrink = 0.5;
  double gamma_min = 1e-10;
  /// Re-centering budget before a path step is rejected, and the count at
  /// or below which the step is grown.
  int recenter_limit = 5;
  int recenter_fast = 2;
  int max_newton = 10000;
  double fraction_to_boundary = 0.95;
  /// Sufficient-decrease factor of the backtracking line search.
  double armijo = 0.25;
  int max_restarts = 5;
  HessianOptions hessian;
  std::function<void(const StepRecord&)> observer;

  /// Throws Error on out-of-range settings.
  void validate() const;
};

struct SolveReport {
  /// Full coefficient vector u + g (n*d'), Dirichlet values included.
  Vector u;
  /// Free-dof part of the iterate.
  Vector u_free;
  /// Auxiliary variables (s for p-mode, sigma for the limit mode).
  Vector s;
  int newton_iters_aux = 0;
  int newton_iters_main = 0;
  double t_final = 0.0;
  /// Certified bound on <c,x> - min for the final centered point.
  double gap_bound = 0.0;
  int restarts = 0;
  double R = 0.0;
  double objective = 0.0;
  double cost = 0.0;
  double final_decrement = 0.0;

  int newton_iters() const { return newton_iters_aux + newton_iters_main; }
};

/// Two-stage path-following interior-point solve of the discrete program.
/// Throws SolverFailure on iteration cap, restart limit or factorization
/// failure.
SolveReport solve(const DiscreteProblem& prob, const SolverConfig& cfg = {});

/// One line-searched Newton step on t<dir,x> + F(x); `decrement` is taken
/// at the starting point.
struct NewtonStepResult {
  BarrierPoint next;
  double decrement = 0.0;
  double step = 0.0;
};

NewtonStepResult damped_newton_step(const PBarrier& barrier,
                                    const BarrierPoint& x, const Vector& dir,
                                    double t, const SolverConfig& cfg);

struct StageResult {
  BarrierPoint point;
  int newton_steps = 0;
  double t = 0.0;
  double decrement = 0.0;
};

/// Auxiliary path from x_hat towards the analytic center of F.
StageResult stage_aux(const PBarrier& barrier, const BarrierPoint& x_hat,
                      const SolverConfig& cfg);

/// Main path from a point near the analytic center to t >= 2 nu / eps.
StageResult stage_main(const PBarrier& barrier, const BarrierPoint& x0,
                       const SolverConfig& cfg);

}  // namespace plap
