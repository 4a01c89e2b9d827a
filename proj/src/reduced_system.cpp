#include "plap/reduced_system.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>

namespace plap {

namespace {

using Triplet = Eigen::Triplet<double, int>;
using DirectSolver =
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>;
using Preconditioner =
    Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>;
using IterativeSolver =
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower, Preconditioner>;

}  // namespace

ElementPattern::ElementPattern(const FemOperators& ops,
                               const HessianOptions& options)
    : size_(ops.num_free()),
      local_size_(ops.nodes_per_element() * ops.d_prime),
      options_(options) {
  const Mesh& mesh = *ops.mesh;
  const int dp = ops.d_prime;
  const int L = local_size_;
  local_free_.resize(static_cast<std::size_t>(ops.m) * L);
  for (Index i = 0; i < ops.m; ++i) {
    const auto e = mesh.element(i);
    for (int a = 0; a < ops.nodes_per_element(); ++a)
      for (int r = 0; r < dp; ++r)
        local_free_[i * L + a * dp + r] = ops.dof_to_free[e[a] * dp + r];
  }

  std::vector<Triplet> full;
  for (Index i = 0; i < ops.m; ++i)
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) {
        const Index fa = local_free(i, a), fb = local_free(i, b);
        if (fa >= 0 && fb >= 0)
          full.emplace_back(static_cast<int>(fa), static_cast<int>(fb), 1.0);
      }
  SparseMatrix sym(size_, size_);
  sym.setFromTriplets(full.begin(), full.end());

  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
  Eigen::AMDOrdering<int> amd;
  amd(sym, pinv);
  const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p =
      pinv.inverse();
  perm_.assign(p.indices().data(), p.indices().data() + size_);

  std::vector<Triplet> lower;
  lower.reserve(full.size());
  for (const auto& t : full) {
    const int r = perm_[t.row()], c = perm_[t.col()];
    if (r >= c) lower.emplace_back(r, c, 0.0);
  }
  pattern_.resize(size_, size_);
  pattern_.setFromTriplets(lower.begin(), lower.end());
  pattern_.makeCompressed();

  auto offset = [this](int row, int col) {
    const int* begin = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[col];
    const int* end = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    return static_cast<int>(it - pattern_.innerIndexPtr());
  };
  slots_.resize(ops.m);
  for (Index i = 0; i < ops.m; ++i) {
    for (int a = 0; a < L; ++a)
      for (int b = a; b < L; ++b) {
        const Index fa = local_free(i, a), fb = local_free(i, b);
        if (fa < 0 || fb < 0) continue;
        const int pa = perm_[fa], pb = perm_[fb];
        slots_[i].push_back({a, b, offset(std::max(pa, pb), std::min(pa, pb))});
      }
  }

  // Symbolic size estimate from a diagonally dominant stand-in matrix.
  if (size_ > 0) {
    SparseMatrix probe = pattern_;
    for (int c = 0; c < probe.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(probe, c); it; ++it)
        it.valueRef() = it.row() == it.col() ? 0.0 : -1.0;
    for (int c = 0; c < probe.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(probe, c); it; ++it)
        if (it.row() != it.col()) {
          probe.coeffRef(it.row(), it.row()) += 1.0;
          probe.coeffRef(c, c) += 1.0;
        }
    for (int c = 0; c < probe.outerSize(); ++c) probe.coeffRef(c, c) += 1.0;
    DirectSolver llt;
    llt.compute(probe);
    const auto nnz = static_cast<std::size_t>(llt.matrixL().nestedExpression().nonZeros());
    factor_bytes_ = nnz * (sizeof(double) + sizeof(int));
  }
  direct_ = factor_bytes_ <= options_.memory_budget_bytes;
}

void ElementPattern::add(SparseMatrix& K, Index elem, const Matrix& local) const {
  double* values = K.valuePtr();
  for (const auto& [a, b, slot] : slots_[elem]) values[slot] += local(a, b);
}

struct SpdFactor::Impl {
  std::vector<int> perm;
  SparseMatrix K;
  bool direct = true;
  DirectSolver llt;
  IterativeSolver cg;
};

SpdFactor::SpdFactor(const ElementPattern& pattern, SparseMatrix K)
    : impl_(std::make_unique<Impl>()) {
  impl_->perm = pattern.permutation();
  impl_->K = std::move(K);
  impl_->direct = pattern.uses_direct_solver();
  if (impl_->direct) {
    impl_->llt.compute(impl_->K);
    if (impl_->llt.info() != Eigen::Success)
      throw SolverFailure("hessian: matrix is not positive definite");
  } else {
    impl_->cg.setTolerance(pattern.options().cg_tolerance);
    impl_->cg.setMaxIterations(pattern.options().cg_max_iterations);
    impl_->cg.compute(impl_->K);
    if (impl_->cg.info() != Eigen::Success)
      throw SolverFailure("hessian: incomplete Cholesky preconditioner failed");
  }
}

SpdFactor::~SpdFactor() = default;
SpdFactor::SpdFactor(SpdFactor&&) noexcept = default;
SpdFactor& SpdFactor::operator=(SpdFactor&&) noexcept = default;

bool SpdFactor::direct() const { return impl_->direct; }

Vector SpdFactor::solve(const Vector& b) const {
  const auto& perm = impl_->perm;
  const Index n = b.size();
  Vector bp(n);
  for (Index i = 0; i < n; ++i) bp[perm[i]] = b[i];
  Vector xp;
  if (impl_->direct) {
    xp = impl_->llt.solve(bp);
  } else {
    xp = impl_->cg.solve(bp);
    if (impl_->cg.info() != Eigen::Success)
      throw SolverFailure("hessian: conjugate gradients did not converge");
  }
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = xp[perm[i]];
  return x;
}

}  // namespace plap
