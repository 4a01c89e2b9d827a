#pragma once

#include <memory>

#include "plap/problem.hpp"
#include "plap/reduced_system.hpp"

namespace plap {

/// Smallest slacks of a point, for progress logging.
struct PointDiagnostics {
  double min_z = 0.0;
  double min_tau = 0.0;
  double min_s = 0.0;
};

/// Iterate x = [u; s] of the p-mode barrier with cached element quantities.
struct BarrierPoint {
  Vector x;
  /// y^(j,r) = D^(j,r)(u+g), column j*d'+r.
  Matrix y;
  /// s^(2/p)
  Vector s_pow;
  /// z_i = s_i^(2/p) - sum_{j,r} (y_i^(j,r))^2
  Vector z;
  /// tau_i = R - w_i s_i
  Vector tau;
  bool feasible = false;
};

class PBarrier;

/// Factored Hessian of the p-mode barrier. The diagonal s-block is
/// eliminated; the remaining u-block has finite-element sparsity.
class PHessianFactor {
 public:
  /// Solves F'' dx = rhs.
  Vector solve(const Vector& rhs) const;
  bool direct() const { return factor_.direct(); }

 private:
  friend class PBarrier;
  PHessianFactor(const PBarrier& barrier, SpdFactor factor, Vector d_ss,
                 Vector c_us, Matrix b_local);

  const PBarrier* barrier_;
  SpdFactor factor_;
  Vector d_ss_;    // F_ss diagonal
  Vector c_us_;    // F_us column i = c_us_[i] * b_i
  Matrix b_local_; // b_i = B_i^T a_i over local dofs, one column per element
};

/// Self-concordant barrier
///   F(u,s) = -sum log z_i - sum log tau_i
/// for the search set of the discrete p-Laplace program, with derivatives
/// restricted to the free dofs.
class PBarrier {
 public:
  using Point = BarrierPoint;
  using Factor = PHessianFactor;

  /// Uses prob.R unless `R` is positive.
  explicit PBarrier(const DiscreteProblem& prob, double R = 0.0,
                    std::shared_ptr<const ElementPattern> pattern = nullptr,
                    const HessianOptions& options = {});

  const DiscreteProblem& problem() const { return prob_; }
  const FemOperators& ops() const { return *prob_.ops; }
  double R() const { return R_; }
  Index size() const { return prob_.num_vars(); }
  Index num_free() const { return prob_.num_free(); }
  Index num_elements() const { return prob_.num_elements(); }
  /// Barrier parameter 4m.
  double nu() const { return 4.0 * static_cast<double>(num_elements()); }
  const Vector& cost() const { return cost_; }
  const std::shared_ptr<const ElementPattern>& pattern() const {
    return pattern_;
  }

  Point point(Vector x) const;
  Point point(const Vector& u, const Vector& s) const;

  /// Throws InfeasiblePoint outside the open feasible set.
  double value(const Point& pt) const;
  Vector gradient(const Point& pt) const;
  /// F'' v through the derivative matrices (no elimination).
  Vector hessian_apply(const Point& pt, const Vector& v) const;
  Factor factor(const Point& pt) const;

  /// Largest a in (0, limit] with x + a' dx feasible for all a' < a.
  double max_step(const Point& pt, const Vector& dx, double limit) const;

  /// Some tau_i closer to the cap than 1e-3 R w_i / max(w).
  bool near_wall(const Point& pt) const;
  PointDiagnostics diagnostics(const Point& pt) const;

 private:
  friend class PHessianFactor;
  void require_feasible(const Point& pt) const;

  DiscreteProblem prob_;
  double R_;
  std::shared_ptr<const ElementPattern> pattern_;
  Vector cost_;
  double w_max_ = 0.0;
};

/// sqrt(<rhs, F''^{-1} rhs>)
template <class Factor>
double newton_decrement(const Factor& factor, const Vector& rhs) {
  const double q = rhs.dot(factor.solve(rhs));
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace plap
