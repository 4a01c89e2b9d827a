#pragma once

// Two-stage path-following over any barrier exposing point / gradient /
// factor / max_step. Shared by the p-mode and the limit-mode solvers.

#include <cmath>
#include <concepts>
#include <optional>

#include "plap/solver.hpp"

namespace plap {

template <class B>
concept PathBarrier = requires(const B& b, const typename B::Point& pt,
                               const Vector& v, Vector x) {
  typename B::Factor;
  { b.point(std::move(x)) } -> std::same_as<typename B::Point>;
  { b.value(pt) } -> std::convertible_to<double>;
  { b.gradient(pt) } -> std::convertible_to<Vector>;
  { b.factor(pt) } -> std::same_as<typename B::Factor>;
  { b.max_step(pt, v, 1.0) } -> std::convertible_to<double>;
  { b.nu() } -> std::convertible_to<double>;
  { b.cost() } -> std::convertible_to<const Vector&>;
  { b.near_wall(pt) } -> std::convertible_to<bool>;
  { b.diagnostics(pt) } -> std::same_as<PointDiagnostics>;
};

/// An accepted iterate came close to the cap R; the caller restarts with a
/// larger R.
class RadiusWall : public Error {
 public:
  using Error::Error;
};

namespace path {

template <PathBarrier B>
struct State {
  typename B::Point pt;
  typename B::Factor hessian;
  Vector grad;
};

template <PathBarrier B>
State<B> make_state(const B& barrier, typename B::Point pt) {
  auto hessian = barrier.factor(pt);
  Vector grad = barrier.gradient(pt);
  return {std::move(pt), std::move(hessian), std::move(grad)};
}

template <PathBarrier B>
struct Centering {
  std::optional<State<B>> moved;  // empty: start point was already centered
  int steps = 0;
  double lambda = 0.0;  // decrement at the last point examined
  double step = 0.0;    // length of the last step taken
  bool ok = false;
};

template <PathBarrier B>
struct Outcome {
  typename B::Point point;
  int aux_steps = 0;
  int main_steps = 0;
  double t = 0.0;
  double lambda = 0.0;
};

/// Certified bound on <c,x> - min at a point with decrement lambda < 1 on
/// the main path at parameter t.
inline double gap_bound(double nu, double t, double lambda) {
  return (nu + (lambda + std::sqrt(nu)) * lambda / (1.0 - lambda)) / t;
}

template <PathBarrier B>
class Engine {
 public:
  Engine(const B& barrier, const SolverConfig& cfg, int& total_steps,
         int restart = 0)
      : b_(barrier), cfg_(cfg), total_(total_steps), restart_(restart) {}

  /// Newton direction for t<dir,x> + F(x); sets the decrement.
  Vector direction(const State<B>& s, const Vector& dir, double t,
                   double& lambda) const {
    Vector g = s.grad;
    if (t != 0.0) g += t * dir;
    Vector dx = -s.hessian.solve(g);
    lambda = std::sqrt(std::max(0.0, -g.dot(dx)));
    return dx;
  }

  double dual_norm(const State<B>& s, const Vector& v) const {
    return std::sqrt(std::max(0.0, v.dot(s.hessian.solve(v))));
  }

  /// Damped Newton steps until the decrement is at most beta_center or
  /// `limit` steps were spent. `start` is never modified.
  Centering<B> center(const State<B>& start, const Vector& dir, double t,
                      int limit) {
    Centering<B> out;
    const State<B>* cur = &start;
    while (true) {
      double lambda = 0.0;
      const Vector dx = direction(*cur, dir, t, lambda);
      out.lambda = lambda;
      typename B::Point next;
      if (lambda <= cfg_.beta_center) {
        out.ok = true;
        return out;
      }
      if (out.steps >= limit) return out;
      if (total_ >= cfg_.max_newton)
        throw SolverFailure("path-following: Newton iteration cap (" +
                            std::to_string(cfg_.max_newton) + ") exceeded");

      // Full Newton step cut back to the feasible region, then halved until
      // the merit t<dir,x> + F(x) decreases sufficiently.
      const double frac = cfg_.fraction_to_boundary;
      const double room = b_.max_step(cur->pt, dx, 1.0 / frac);
      double step = room >= 1.0 / frac ? 1.0 : std::min(1.0, frac * room);
      const double merit0 = merit(cur->pt, dir, t);
      const double slope = -lambda * lambda;
      while (true) {
        if (step < 1e-16)
          throw SolverFailure("path-following: line search collapsed");
        auto trial = b_.point(cur->pt.x + step * dx);
        // For lambda < 1/4 self-concordance guarantees the full step
        // decreases the merit; the Armijo test there only measures roundoff.
        if (trial.feasible &&
            ((step == 1.0 && lambda < 0.25) ||
             merit(trial, dir, t) <= merit0 + cfg_.armijo * step * slope)) {
          next = std::move(trial);
          break;
        }
        step *= 0.5;
      }
      ++total_;
      ++out.steps;
      out.step = step;
      ++(stage_ == Stage::aux ? aux_count_ : main_count_);
      if (b_.near_wall(next)) throw RadiusWall("iterate close to the R cap");
      emit(next, t, lambda, step, false);
      out.moved = make_state(b_, std::move(next));
      cur = &*out.moved;
    }
  }

  /// Newton on F alone from x_hat until the decrement is at most
  /// beta_center.
  State<B> aux(State<B> s) {
    stage_ = Stage::aux;
    auto c = center(s, Vector(), 0.0, cfg_.max_newton);
    if (c.moved) s = std::move(*c.moved);
    emit(s.pt, 0.0, c.lambda, 0.0, true);
    return s;
  }

  /// Follows argmin t<c,x> + F(x) up to t = 2 nu / eps.
  State<B> main(State<B> s, double& t_final, double& lambda) {
    stage_ = Stage::main;
    const Vector& c = b_.cost();
    const double nu = b_.nu(), sqrt_nu = std::sqrt(nu);
    const double t_target = 2.0 * nu / cfg_.eps;
    const double c_norm = dual_norm(s, c);
    double t = c_norm > 0.0 ? std::min(cfg_.beta_center / c_norm, t_target)
                            : t_target;
    {
      auto c0 = center(s, c, t, cfg_.max_newton);
      if (c0.moved) s = std::move(*c0.moved);
      lambda = c0.lambda;
      emit(s.pt, t, lambda, 0.0, true);
    }
    double gamma = cfg_.gamma0;
    while (t < t_target) {
      const double t_new = std::min(t * (1.0 + gamma / sqrt_nu), t_target);
      auto r = center(s, c, t_new, cfg_.recenter_limit);
      if (!r.ok) {
        gamma *= cfg_.gamma_shrink;
        if (gamma < cfg_.gamma_min)
          throw SolverFailure("path-following: main step size vanished");
        continue;
      }
      if (r.moved) s = std::move(*r.moved);
      t = t_new;
      lambda = r.lambda;
      emit(s.pt, t, lambda, 0.0, true);
      if (r.steps <= cfg_.recenter_fast)
        gamma = std::min(gamma * cfg_.gamma_grow, sqrt_nu);
    }
    t_final = t;
    return s;
  }

  int aux_steps() const { return aux_count_; }
  int main_steps() const { return main_count_; }

  Outcome<B> run(typename B::Point x_hat) {
    Outcome<B> out;
    State<B> s = make_state(b_, std::move(x_hat));
    s = aux(std::move(s));
    s = main(std::move(s), out.t, out.lambda);
    out.point = std::move(s.pt);
    out.aux_steps = aux_count_;
    out.main_steps = main_count_;
    return out;
  }

 private:
  double merit(const typename B::Point& pt, const Vector& dir, double t) const {
    return (t != 0.0 ? t * dir.dot(pt.x) : 0.0) + b_.value(pt);
  }

  void emit(const typename B::Point& pt, double t, double lambda, double step,
            bool centered) const {
    if (!cfg_.observer) return;
    const PointDiagnostics dg = b_.diagnostics(pt);
    StepRecord rec;
    rec.stage = stage_;
    rec.iteration = total_;
    rec.t = t;
    rec.lambda = lambda;
    rec.step = step;
    rec.min_z = dg.min_z;
    rec.min_tau = dg.min_tau;
    rec.min_s = dg.min_s;
    rec.cost = b_.cost().dot(pt.x);
    rec.centered = centered;
    rec.restart = restart_;
    cfg_.observer(rec);
  }

  const B& b_;
  const SolverConfig& cfg_;
  int& total_;
  int restart_;
  Stage stage_ = Stage::aux;
  int aux_count_ = 0;
  int main_count_ = 0;
};

}  // namespace path
}  // namespace plap
