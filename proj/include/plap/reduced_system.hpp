#pragma once

#include <memory>
#include <vector>

#include "plap/femops.hpp"

namespace plap {

struct HessianOptions {
  /// Above this estimated Cholesky-factor size the solver switches to
  /// preconditioned conjugate gradients.
  std::size_t memory_budget_bytes = std::size_t{2} << 30;
  double cg_tolerance = 1e-14;
  int cg_max_iterations = 20000;
};

/// Sparsity pattern of element-assembled symmetric matrices on the free
/// dofs, stored as the lower triangle under a fill-reducing permutation that
/// is computed once. Element contributions scatter into precomputed slots.
class ElementPattern {
 public:
  ElementPattern(const FemOperators& ops, const HessianOptions& options = {});

  Index size() const { return size_; }
  int local_size() const { return local_size_; }
  bool uses_direct_solver() const { return direct_; }
  std::size_t estimated_factor_bytes() const { return factor_bytes_; }
  const HessianOptions& options() const { return options_; }

  /// Free index of local dof l (= a*d' + r) of element `elem`, or -1.
  Index local_free(Index elem, int l) const {
    return local_free_[elem * local_size_ + l];
  }

  /// Zero matrix carrying the full pattern (permuted, lower triangle).
  SparseMatrix zero_matrix() const { return pattern_; }

  /// Adds a symmetric local_size x local_size element matrix. Rows and
  /// columns of Dirichlet dofs are skipped.
  void add(SparseMatrix& K, Index elem, const Matrix& local) const;

  /// new position of free dof i
  const std::vector<int>& permutation() const { return perm_; }

 private:
  Index size_ = 0;
  int local_size_ = 0;
  std::vector<Index> local_free_;
  std::vector<int> perm_;
  SparseMatrix pattern_;
  // Per element: (local a, local b, value offset) for a <= b, both free.
  std::vector<std::vector<std::array<int, 3>>> slots_;
  bool direct_ = true;
  std::size_t factor_bytes_ = 0;
  HessianOptions options_;
};

/// Factorization of an SPD matrix assembled on an ElementPattern. Solves
/// work in free-dof ordering. Throws SolverFailure if the matrix is not
/// numerically positive definite.
class SpdFactor {
 public:
  SpdFactor(const ElementPattern& pattern, SparseMatrix K);
  ~SpdFactor();
  SpdFactor(SpdFactor&&) noexcept;
  SpdFactor& operator=(SpdFactor&&) noexcept;

  Vector solve(const Vector& b) const;
  bool direct() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace plap
