#include "plap/solver.hpp"

#include <cstdio>

#include "plap/path_following.hpp"

namespace plap {

void SolverConfig::validate() const {
  if (!(eps > 0.0)) throw Error("solver: eps must be positive");
  if (!(beta_center > 0.0 && beta_center < 1.0))
    throw Error("solver: beta_center must lie in (0,1)");
  if (!(gamma0 > 0.0 && gamma_grow > 0.0 && gamma_shrink > 0.0 &&
        gamma_shrink < 1.0))
    throw Error("solver: step factors must be positive, shrink below 1");
  if (!(fraction_to_boundary > 0.0 && fraction_to_boundary < 1.0))
    throw Error("solver: fraction_to_boundary must lie in (0,1)");
  if (!(armijo > 0.0 && armijo < 0.5))
    throw Error("solver: armijo must lie in (0,1/2)");
  if (max_newton < 1 || recenter_limit < 1 || max_restarts < 0)
    throw Error("solver: iteration limits must be positive");
}

std::string format_step(const StepRecord& rec) {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "stage=%s iter=%d restart=%d centered=%d t=%.6e lambda=%.6e "
                "step=%.6e min_z=%.6e min_tau=%.6e min_s=%.6e cost=%.12e",
                rec.stage == Stage::aux ? "aux" : "main", rec.iteration,
                rec.restart, rec.centered ? 1 : 0, rec.t, rec.lambda, rec.step,
                rec.min_z, rec.min_tau, rec.min_s, rec.cost);
  return buf;
}

SolveReport solve(const DiscreteProblem& prob, const SolverConfig& cfg) {
  cfg.validate();
  auto pattern = std::make_shared<const ElementPattern>(*prob.ops, cfg.hessian);
  SolveReport report;
  double R = prob.R;
  int total = 0;
  for (int restart = 0;; ++restart) {
    DiscreteProblem attempt = prob;
    attempt.R = R;
    const InitialPoint x0 = initial_point(attempt);
    R = x0.R;
    const PBarrier barrier(attempt, R, pattern);
    path::Engine<PBarrier> engine(barrier, cfg, total, restart);
    try {
      auto out = engine.run(barrier.point(x0.u, x0.s));
      report.newton_iters_aux += out.aux_steps;
      report.newton_iters_main += out.main_steps;
      report.restarts = restart;
      report.R = R;
      report.t_final = out.t;
      report.final_decrement = out.lambda;
      report.gap_bound = path::gap_bound(barrier.nu(), out.t, out.lambda);
      const Index nf = prob.num_free();
      report.u_free = out.point.x.head(nf);
      report.s = out.point.x.tail(prob.num_elements());
      report.u = full_solution(prob, report.u_free);
      report.objective = objective(prob, report.u_free);
      report.cost = cost_value(prob, report.u_free, report.s);
      return report;
    } catch (const RadiusWall&) {
      report.newton_iters_aux += engine.aux_steps();
      report.newton_iters_main += engine.main_steps();
      if (restart + 1 > cfg.max_restarts)
        throw SolverFailure("solver: R restart limit (" +
                            std::to_string(cfg.max_restarts) + ") exceeded");
      R *= prob.R_growth;
    }
  }
}

NewtonStepResult damped_newton_step(const PBarrier& barrier,
                                    const BarrierPoint& x, const Vector& dir,
                                    double t, const SolverConfig& cfg) {
  cfg.validate();
  int total = 0;
  SolverConfig one = cfg;
  one.beta_center = 1e-300;  // never satisfied: take exactly one step
  one.observer = nullptr;
  path::Engine<PBarrier> engine(barrier, one, total);
  const auto start = path::make_state(barrier, x);
  NewtonStepResult out;
  engine.direction(start, dir, t, out.decrement);
  auto c = engine.center(start, dir, t, 1);
  out.step = c.step;
  out.next = c.moved ? std::move(c.moved->pt) : x;
  return out;
}

StageResult stage_aux(const PBarrier& barrier, const BarrierPoint& x_hat,
                      const SolverConfig& cfg) {
  cfg.validate();
  int total = 0;
  path::Engine<PBarrier> engine(barrier, cfg, total);
  auto s = engine.aux(path::make_state(barrier, x_hat));
  StageResult out;
  double lambda_f = 0.0;
  engine.direction(s, Vector::Zero(barrier.size()), 0.0, lambda_f);
  out.decrement = lambda_f;
  out.newton_steps = total;
  out.point = std::move(s.pt);
  return out;
}

StageResult stage_main(const PBarrier& barrier, const BarrierPoint& x0,
                       const SolverConfig& cfg) {
  cfg.validate();
  int total = 0;
  path::Engine<PBarrier> engine(barrier, cfg, total);
  StageResult out;
  auto s = engine.main(path::make_state(barrier, x0), out.t, out.decrement);
  out.newton_steps = total;
  out.point = std::move(s.pt);
  return out;
}

}  // namespace plap
