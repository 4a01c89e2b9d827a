#pragma once

#include <functional>
#include <memory>

#include "plap/femops.hpp"

namespace plap {

/// Vector-valued callable; entries beyond d' are ignored.
using VectorFn = std::function<std::array<double, 2>(const Point& x)>;
/// Boundary callable receiving the point and the unit outward normal there.
using BoundaryFn =
    std::function<std::array<double, 2>(const Point& x, const Point& normal)>;

/// Continuous data of the p-Laplace problem. Empty callables mean zero.
struct ContinuousData {
  double p = 2.0;
  int d_prime = 1;
  VectorFn f;
  BoundaryFn h;
  VectorFn g;
  /// Accept meshes without Dirichlet facets (translation kernel).
  bool allow_pure_neumann = false;
};

/// The discrete convex program: minimize <c,(u,s)> over
/// { s_i >= |D(u+g)|_i^p, w_i s_i <= R }.
struct DiscreteProblem {
  std::shared_ptr<const FemOperators> ops;
  double p = 2.0;
  /// -(M f + Mbar h) on free dofs.
  Vector c_u;
  /// w / p.
  Vector c_s;
  double R = 2.0;
  double R_growth = 4.0;
  /// Full coefficient vectors: prolonged Dirichlet datum and source samples.
  Vector g_coeffs;
  Vector f_coeffs;
  Vector h_coeffs;
  /// Width of the bounding box of the domain.
  double width = 1.0;

  Index num_free() const { return c_u.size(); }
  Index num_elements() const { return c_s.size(); }
  Index num_vars() const { return num_free() + num_elements(); }
  Vector cost() const;
};

/// Unit outward normals at Neumann nodes (average of adjacent Neumann facet
/// normals, normalized); zero elsewhere.
std::vector<Point> nodal_normals(const Mesh& mesh);

/// Samples f on all nodes, h on Neumann nodes and g on Dirichlet nodes.
/// g is prolonged by zero.
struct SampledData {
  Vector f, h, g;
};
SampledData sample(const FemOperators& ops, const ContinuousData& data);

struct RBound {
  double R0 = 2.0;
  double growth = 4.0;
};

/// Integral of |v|_2^q for a piecewise-linear field v, using the mass
/// quadrature rule.
double lq_norm_q(const FemOperators& ops, const Vector& coeffs, double q);

/// R0 = 2(1 + |g|_{X^p}^p) + 8(p-1) L^q |f|_{L^q}^q with q = p/(p-1); the
/// Neumann term is dropped and recovered by restarts.
RBound heuristic_R(const FemOperators& ops, double p, const Vector& f_coeffs,
                   const Vector& g_coeffs, double width);

DiscreteProblem discretize(std::shared_ptr<const FemOperators> ops,
                           const ContinuousData& data);
DiscreteProblem discretize(std::shared_ptr<const Mesh> mesh,
                           const ContinuousData& data);

struct InitialPoint {
  Vector u;
  Vector s;
  double R = 0.0;
};

/// u = 0, s_i = 1 + |Dg|_i^p. R is grown by R_growth until the point is
/// strictly inside the cap.
InitialPoint initial_point(const DiscreteProblem& prob);

/// J_p(u) = (1/p)|u+g|_{X^p}^p - <M f + Mbar h, u> for free-dof values u.
double objective(const DiscreteProblem& prob, const Vector& u);

/// <c,(u,s)>.
double cost_value(const DiscreteProblem& prob, const Vector& u,
                  const Vector& s);

/// Full coefficient vector u + g from free-dof values.
Vector full_solution(const DiscreteProblem& prob, const Vector& u);

}  // namespace plap
