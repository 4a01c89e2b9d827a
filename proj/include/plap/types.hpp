#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace plap {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using SparseMatrixR = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Point = std::array<double, 2>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a barrier quantity is requested at a point outside the
/// open feasible set. Kept distinct from numeric failures.
class InfeasiblePoint : public Error {
 public:
  using Error::Error;
};

/// Raised by the path-following solvers (iteration cap, restart limit,
/// factorization failure).
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace plap
