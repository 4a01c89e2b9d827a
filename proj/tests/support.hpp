#pragma once

// Oracles shared by the unit and acceptance tests: random strictly feasible
// barrier points, fourth-order finite differences, a cotangent-formula p = 2
// solve and a 1D grid search. None of them calls the solver.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/SparseCholesky>

#include "plap/barrier.hpp"
#include "plap/cases.hpp"

namespace plap::testing {

using Pair = std::array<double, 2>;

/// Problem on unit_square(k) with left and top free and nonzero f, h, g.
inline DiscreteProblem rich_problem(int k, double p, int d_prime) {
  ContinuousData data;
  data.p = p;
  data.d_prime = d_prime;
  data.f = [](const Point& x) { return Pair{1.0 + x[0], x[1] - 0.5}; };
  data.h = [](const Point& x, const Point& n) {
    return Pair{hat_h(x) * n[0] + 0.3, hat_h(x) * n[1]};
  };
  data.g = [](const Point& x) { return Pair{0.5 * x[0] * x[1], x[0] - x[1]}; };
  return discretize(
      std::make_shared<const Mesh>(unit_square(k, side_left | side_top)), data);
}

/// Strictly feasible x = [u; s] with z_i in [0.05, 1] and a cap R chosen
/// so that tau_i stays away from zero.
struct RandomPoint {
  Vector x;
  double R = 0.0;
};

inline RandomPoint random_point(const DiscreteProblem& prob, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  std::uniform_real_distribution<double> slack(0.05, 1.0);
  std::uniform_real_distribution<double> cap(1.5, 3.0);
  const auto& ops = *prob.ops;
  const Index nf = prob.num_free(), m = prob.num_elements();
  Vector u(nf);
  for (Index i = 0; i < nf; ++i) u[i] = U(rng);
  const Vector sq = apply_gradient_norms(ops, full_solution(prob, u));
  Vector s(m);
  double wmax = 0.0;
  for (Index i = 0; i < m; ++i) {
    s[i] = std::pow(sq[i] + slack(rng), 0.5 * prob.p);
    wmax = std::max(wmax, ops.weights[i] * s[i]);
  }
  RandomPoint out;
  out.x.resize(nf + m);
  out.x << u, s;
  out.R = wmax * cap(rng);
  return out;
}

/// Fourth-order central difference of a scalar function of a step size.
template <class Fn>
double central_difference(Fn&& f, double h) {
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

/// Finite-difference gradient of a barrier's value. The step along each
/// coordinate is `rel_step` times the distance to the feasibility boundary
/// (capped at max(1, |x_k|)).
template <class Barrier>
Vector fd_gradient(const Barrier& b, const Vector& x, double rel_step = 1e-3) {
  Vector g(x.size());
  const auto pt = b.point(x);
  for (Index k = 0; k < x.size(); ++k) {
    const double scale = std::max(1.0, std::abs(x[k]));
    const Vector e = Vector::Unit(x.size(), k);
    const double room = std::min(b.max_step(pt, e, scale),
                                 b.max_step(pt, Vector(-e), scale));
    const double h = rel_step * room;
    g[k] = central_difference(
        [&](double a) {
          Vector xa = x;
          xa[k] += a;
          return b.value(b.point(std::move(xa)));
        },
        h);
  }
  return g;
}

/// Directional difference of the gradient: approximates F''(x) v.
template <class Barrier>
Vector fd_hessian_apply(const Barrier& b, const Vector& x, const Vector& v,
                        double h) {
  auto grad_at = [&](double a) { return b.gradient(b.point(Vector(x + a * v))); };
  return (-grad_at(2.0 * h) + 8.0 * grad_at(h) - 8.0 * grad_at(-h) +
          grad_at(-2.0 * h)) /
         (12.0 * h);
}

/// Stiffness matrix of P1 elements on a triangulation from the cotangent
/// formula K_ab = -(cot alpha + cot beta) / 2, replicated per component.
inline SparseMatrix cotangent_stiffness(const Mesh& mesh, int d_prime) {
  std::vector<Eigen::Triplet<double, int>> trips;
  for (Index i = 0; i < mesh.num_elements(); ++i) {
    const auto e = mesh.element(i);
    for (int c = 0; c < 3; ++c) {
      const Index a = e[(c + 1) % 3], b = e[(c + 2) % 3];
      const Point& P = mesh.nodes[e[c]];
      const Point& A = mesh.nodes[a];
      const Point& B = mesh.nodes[b];
      const double ux = A[0] - P[0], uy = A[1] - P[1];
      const double vx = B[0] - P[0], vy = B[1] - P[1];
      const double cot = (ux * vx + uy * vy) / std::abs(ux * vy - uy * vx);
      for (int r = 0; r < d_prime; ++r) {
        const int ia = static_cast<int>(a * d_prime + r);
        const int ib = static_cast<int>(b * d_prime + r);
        trips.emplace_back(ia, ib, -0.5 * cot);
        trips.emplace_back(ib, ia, -0.5 * cot);
        trips.emplace_back(ia, ia, 0.5 * cot);
        trips.emplace_back(ib, ib, 0.5 * cot);
      }
    }
  }
  const int n = static_cast<int>(mesh.num_nodes() * d_prime);
  SparseMatrix K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

/// Minimizer of the p = 2 energy by a direct sparse solve of
/// K_ff u = load_f - K_fD g. Returns the full coefficient vector.
inline Vector direct_p2_solution(const DiscreteProblem& prob) {
  const auto& ops = *prob.ops;
  const SparseMatrix K = cotangent_stiffness(*ops.mesh, ops.d_prime);
  const Vector rhs_full = -(K * prob.g_coeffs);
  const Index nf = ops.num_free();
  std::vector<Eigen::Triplet<double, int>> trips;
  for (int col = 0; col < K.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const Index fr = ops.dof_to_free[it.row()], fc = ops.dof_to_free[col];
      if (fr >= 0 && fc >= 0)
        trips.emplace_back(static_cast<int>(fr), static_cast<int>(fc), it.value());
    }
  SparseMatrix Kff(static_cast<int>(nf), static_cast<int>(nf));
  Kff.setFromTriplets(trips.begin(), trips.end());
  const Vector rhs = ops.restrict_to_free(rhs_full) - prob.c_u;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kff);
  const Vector u = ldlt.solve(rhs);
  return ops.expand(u) + prob.g_coeffs;
}

/// J_p on unit_interval(k) with zero boundary values, evaluated directly:
/// sum_e h |du/h|^p / p - sum_k u_k (h/6)(f_{k-1} + 4 f_k + f_{k+1}).
inline double oned_energy(const std::vector<double>& interior, double p,
                          const std::vector<double>& f_nodes) {
  const std::size_t k = interior.size() + 1;
  const double h = 1.0 / static_cast<double>(k);
  std::vector<double> u(k + 1, 0.0);
  for (std::size_t i = 0; i < interior.size(); ++i) u[i + 1] = interior[i];
  double energy = 0.0;
  for (std::size_t e = 0; e < k; ++e)
    energy += h * std::pow(std::abs((u[e + 1] - u[e]) / h), p) / p;
  for (std::size_t i = 1; i < k; ++i)
    energy -= u[i] * h / 6.0 * (f_nodes[i - 1] + 4.0 * f_nodes[i] + f_nodes[i + 1]);
  return energy;
}

/// Dense grid search over [lo, hi]^dim, re-centred and shrunk around the
/// best grid point until the spacing falls below `resolution`.
inline double grid_search_min(int dim, double lo, double hi,
                              const std::function<double(const std::vector<double>&)>& J,
                              double resolution = 1e-7, int points = 21) {
  std::vector<double> center(dim, 0.5 * (lo + hi));
  double half = 0.5 * (hi - lo);
  double best = J(center);
  while (2.0 * half / (points - 1) > resolution) {
    std::vector<double> arg = center, best_arg = center;
    std::vector<int> idx(dim, 0);
    while (true) {
      for (int j = 0; j < dim; ++j)
        arg[j] = center[j] - half + 2.0 * half * idx[j] / (points - 1);
      const double v = J(arg);
      if (v < best) {
        best = v;
        best_arg = arg;
      }
      int j = 0;
      while (j < dim && ++idx[j] == points) idx[j++] = 0;
      if (j == dim) break;
    }
    center = best_arg;
    half *= 4.0 / (points - 1);
  }
  return best;
}

inline double relative_error(const Vector& approx, const Vector& exact) {
  return (approx - exact).norm() / std::max(exact.norm(), 1e-300);
}

}  // namespace plap::testing
