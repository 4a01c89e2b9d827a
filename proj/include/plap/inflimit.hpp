#pragma once

// Experimental limit mode: minimize sigma * |Omega| - <Mf + Mbar h, u> over
// fields whose elementwise Jacobian norm is bounded by the single scalar
// sigma. Reproduces documented shortcomings; it is not an AMLE solver.

#include <memory>
#include <string_view>

#include "plap/barrier.hpp"
#include "plap/solver.hpp"

namespace plap {

enum class InnerNorm { frobenius, supremum };

/// Parses "frobenius"/"fro" and "supremum"/"sup".
InnerNorm parse_inner_norm(std::string_view name);
const char* to_string(InnerNorm norm);

struct InfProblem {
  std::shared_ptr<const FemOperators> ops;
  /// -(M f + Mbar h) on free dofs.
  Vector c_u;
  Vector g_coeffs;
  InnerNorm inner_norm = InnerNorm::frobenius;
  /// 1 when the mesh has Neumann facets, else 0.
  double sigma_floor = 0.0;
  /// Cap on sigma; 0 selects 4 sigma_0 at the start point.
  double R = 0.0;
  double R_growth = 4.0;

  Index num_free() const { return c_u.size(); }
};

/// Takes ops, c_u and g from a p-mode discretization (p is irrelevant).
InfProblem make_inf_problem(const DiscreteProblem& base, InnerNorm norm);

/// Elementwise inner norm of D(u+g): Frobenius or max-abs entry.
Vector element_norms(const FemOperators& ops, const Vector& full_coeffs,
                     InnerNorm norm);

/// Start value max(max_i |Dg|_i, floor) + 1.
double initial_sigma(const InfProblem& prob);

struct InfPoint {
  Vector x;  // [u_free; sigma]
  Matrix y;  // D(u+g), column j*d'+r
  /// Frobenius: sigma^2 - |y_i|^2 per element. Supremum: sigma - max|y_i|.
  Vector z;
  bool feasible = false;

  double sigma() const { return x[x.size() - 1]; }
};

class InfBarrier;

/// H_uu is factored once; sigma is recovered by a scalar Schur step.
class InfHessianFactor {
 public:
  Vector solve(const Vector& rhs) const;

 private:
  friend class InfBarrier;
  InfHessianFactor(SpdFactor factor, Vector h_us, double h_ss);

  SpdFactor factor_;
  Vector h_us_;
  Vector v_;  // H_uu^{-1} h_us
  double schur_ = 0.0;
};

/// Frobenius: -sum log(sigma^2 - |y_i|^2), nu = 2m + 2.
/// Supremum: -sum log(sigma - y) - sum log(sigma + y) per entry,
/// nu = 2 d d' m + 2.
/// Both add -log(sigma - floor) - log(R - sigma).
class InfBarrier {
 public:
  using Point = InfPoint;
  using Factor = InfHessianFactor;

  InfBarrier(const InfProblem& prob, double R,
             std::shared_ptr<const ElementPattern> pattern = nullptr,
             const HessianOptions& options = {});

  Index size() const { return prob_.num_free() + 1; }
  double R() const { return R_; }
  double nu() const;
  const Vector& cost() const { return cost_; }

  Point point(Vector x) const;
  double value(const Point& pt) const;
  Vector gradient(const Point& pt) const;
  /// F'' v through the derivative matrices (no elimination).
  Vector hessian_apply(const Point& pt, const Vector& v) const;
  Factor factor(const Point& pt) const;
  double max_step(const Point& pt, const Vector& dx, double limit) const;
  /// Always false: the analytic center has sigma within O(R/m) of the cap,
  /// so the cap is checked on the final iterate only (see cap_active).
  bool near_wall(const Point&) const { return false; }
  /// R - sigma below 1e-3 R.
  bool cap_active(const Point& pt) const;
  PointDiagnostics diagnostics(const Point& pt) const;

 private:
  void require_feasible(const Point& pt) const;
  double scalar_gradient(double sigma) const;
  double scalar_hessian(double sigma) const;

  InfProblem prob_;
  double R_;
  std::shared_ptr<const ElementPattern> pattern_;
  Vector cost_;
};

/// Path-following solve with R restarts. report.s holds [sigma].
SolveReport solve_inf(const InfProblem& prob, const SolverConfig& cfg = {});

}  // namespace plap
