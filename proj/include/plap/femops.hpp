#pragma once

#include <memory>
#include <span>
#include <vector>

#include "plap/mesh.hpp"

namespace plap {

/// Discrete operators for piecewise-linear Lagrange elements.
///
/// Coefficient vectors have length n*d' with the image dimension as the fast
/// index: entry d'*k + r belongs to node k, component r. Derivative matrices
/// D^(j,r) map such a vector to the element-wise constant derivative
/// d/dx_j of component r.
struct FemOperators {
  std::shared_ptr<const Mesh> mesh;
  int d = 2;
  int d_prime = 1;
  Index n = 0;
  Index m = 0;

  /// D^(j,r) stored at index j*d' + r, each m x n*d'.
  std::vector<SparseMatrixR> d_mats;
  /// Element volumes (midpoint-rule weights).
  Vector weights;
  /// Interior mass matrix, n*d' x n*d'.
  SparseMatrix mass;
  /// Mass matrix of the Neumann boundary, n*d' x n*d'.
  SparseMatrix boundary_mass;

  /// Unconstrained coefficients, ascending.
  std::vector<Index> free_dofs;
  /// Full dof -> position in free_dofs, -1 for Dirichlet dofs.
  std::vector<Index> dof_to_free;

  /// Gradients of the element shape functions: entry
  /// [(i * npe + a) * d + j] is d(phi_a)/dx_j on element i.
  std::vector<double> shape_grads;

  std::vector<char> dirichlet_node;
  std::vector<char> neumann_node;
  double domain_measure = 0.0;
  double neumann_measure = 0.0;

  int nodes_per_element() const { return d + 1; }
  Index num_dofs() const { return n * d_prime; }
  Index num_free() const { return static_cast<Index>(free_dofs.size()); }
  int num_derivatives() const { return d * d_prime; }
  const SparseMatrixR& D(int j, int r) const { return d_mats[j * d_prime + r]; }
  double grad(Index elem, int a, int j) const {
    return shape_grads[(elem * nodes_per_element() + a) * d + j];
  }

  /// Full coefficient vector with zeros on Dirichlet dofs.
  Vector expand(const Vector& free_values) const;
  /// Restriction of a full vector to free dofs.
  Vector restrict_to_free(const Vector& full) const;
};

/// Assemble all operators. d_prime must be 1 or the mesh dimension.
/// Throws Error on degenerate elements.
FemOperators assemble(std::shared_ptr<const Mesh> mesh, int d_prime);

/// Element-wise derivative values: column j*d'+r holds D^(j,r) coeffs.
Matrix derivatives(const FemOperators& ops, const Vector& coeffs);

/// Squared Frobenius norm of the discrete Jacobian per element.
Vector apply_gradient_norms(const FemOperators& ops, const Vector& coeffs);

/// sum_i w_i |J_i|^p, the discrete X^p norm to the power p.
double xp_norm_p(const FemOperators& ops, const Vector& coeffs, double p);

/// Nodal interpolation of a callable into a full coefficient vector.
template <class Fn>
Vector interpolate(const FemOperators& ops, Fn&& fn) {
  Vector out = Vector::Zero(ops.num_dofs());
  for (Index k = 0; k < ops.n; ++k) {
    const auto value = fn(ops.mesh->nodes[k]);
    for (int r = 0; r < ops.d_prime; ++r) out[k * ops.d_prime + r] = value[r];
  }
  return out;
}

}  // namespace plap
