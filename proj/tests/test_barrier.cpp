#include <doctest.h>

#include <Eigen/Dense>

#include "plap/barrier.hpp"
#include "support.hpp"

using namespace plap;
using namespace plap::testing;

namespace {

DiscreteProblem zero_problem(int k, double p, int d_prime) {
  ContinuousData data;
  data.p = p;
  data.d_prime = d_prime;
  return discretize(std::make_shared<const Mesh>(unit_square(k)), data);
}

Matrix dense_hessian(const PBarrier& b, const BarrierPoint& pt) {
  const Index n = b.size();
  Matrix H(n, n);
  for (Index k = 0; k < n; ++k)
    H.col(k) = b.hessian_apply(pt, Vector::Unit(n, k));
  return H;
}

}  // namespace

TEST_CASE("barrier value and gradient at a hand-computed point") {
  // unit_square(2): 8 elements of area 1/8, zero data, s = 1, R = 2.
  const auto prob = zero_problem(2, 2.0, 1);
  const PBarrier b(prob, 2.0);
  CHECK(b.nu() == doctest::Approx(32.0));
  const auto pt = b.point(Vector::Zero(prob.num_free()),
                          Vector::Ones(prob.num_elements()));
  REQUIRE(pt.feasible);
  // z = 1, tau = 2 - 1/8.
  CHECK(b.value(pt) == doctest::Approx(-8.0 * std::log(15.0 / 8.0)));
  const Vector g = b.gradient(pt);
  for (Index f = 0; f < prob.num_free(); ++f) CHECK(g[f] == 0.0);
  for (Index i = 0; i < prob.num_elements(); ++i)
    CHECK(g[prob.num_free() + i] == doctest::Approx(-1.0 + 1.0 / 15.0));
}

TEST_CASE("gradient and Hessian match finite differences") {
  std::mt19937 rng(11);
  for (int dp : {1, 2}) {
    for (double p : {2.0, 3.0, 8.0}) {
      CAPTURE(dp);
      CAPTURE(p);
      const auto prob = rich_problem(3, p, dp);
      for (int trial = 0; trial < 3; ++trial) {
        const auto rp = random_point(prob, rng);
        const PBarrier b(prob, rp.R);
        const auto pt = b.point(rp.x);
        REQUIRE(pt.feasible);
        const Vector g = b.gradient(pt);
        CHECK(relative_error(fd_gradient(b, rp.x), g) < 1e-5);

        Vector v = Vector::Random(b.size());
        const double h = 1e-4 * b.max_step(pt, v, 1.0);
        const Vector hv = b.hessian_apply(pt, v);
        CHECK(relative_error(fd_hessian_apply(b, rp.x, v, h), hv) < 1e-4);
      }
    }
  }
}

TEST_CASE("Hessian is symmetric positive definite and the factor inverts it") {
  std::mt19937 rng(5);
  for (int dp : {1, 2}) {
    const auto prob = rich_problem(3, 3.0, dp);
    const auto rp = random_point(prob, rng);
    const PBarrier b(prob, rp.R);
    const auto pt = b.point(rp.x);
    const Matrix H = dense_hessian(b, pt);
    CHECK((H - H.transpose()).norm() <= 1e-10 * H.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);

    const auto F = b.factor(pt);
    const Vector rhs = Vector::Random(b.size());
    const Vector dense = H.ldlt().solve(rhs);
    CHECK(relative_error(F.solve(rhs), dense) < 1e-9);

    // Newton decrement bounded by the barrier parameter.
    const Vector g = b.gradient(pt);
    const double lam2 = g.dot(H.ldlt().solve(g));
    CHECK(lam2 <= b.nu() + 1e-8);
    CHECK(newton_decrement(F, g) == doctest::Approx(std::sqrt(lam2)));
  }
}

TEST_CASE("infeasible points are flagged and rejected") {
  const auto prob = zero_problem(2, 2.0, 1);
  const PBarrier b(prob, 2.0);
  const Index nf = prob.num_free(), m = prob.num_elements();
  // s beyond the cap: w s = 2.5 > R.
  auto over = b.point(Vector::Zero(nf), Vector::Constant(m, 20.0));
  CHECK_FALSE(over.feasible);
  CHECK_THROWS_AS(b.value(over), InfeasiblePoint);
  CHECK_THROWS_AS(b.gradient(over), InfeasiblePoint);
  CHECK_THROWS_AS(b.factor(over), InfeasiblePoint);
  // Gradient bound violated: s = 0.
  auto flat = b.point(Vector::Zero(nf), Vector::Zero(m));
  CHECK_FALSE(flat.feasible);
  // Large u breaks the epigraph constraint.
  auto steep = b.point(Vector::Constant(nf, 10.0), Vector::Ones(m));
  CHECK_FALSE(steep.feasible);
  CHECK_THROWS_AS(b.point(Vector::Zero(3)), Error);
}

TEST_CASE("max_step stops exactly at the feasibility boundary") {
  std::mt19937 rng(3);
  const auto prob = rich_problem(3, 5.0, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rp = random_point(prob, rng);
    const PBarrier b(prob, rp.R);
    const auto pt = b.point(rp.x);
    const Vector dx = 10.0 * Vector::Random(b.size());
    const double a = b.max_step(pt, dx, 1e6);
    REQUIRE(a < 1e6);
    CHECK(b.point(Vector(rp.x + 0.999 * a * dx)).feasible);
    CHECK_FALSE(b.point(Vector(rp.x + 1.001 * a * dx)).feasible);
    // The limit is honored.
    CHECK(b.max_step(pt, dx, 0.5 * a) == 0.5 * a);
  }
}

TEST_CASE("near_wall triggers close to the cap") {
  const auto prob = zero_problem(2, 2.0, 1);
  const PBarrier b(prob, 2.0);
  const Index nf = prob.num_free(), m = prob.num_elements();
  CHECK_FALSE(b.near_wall(b.point(Vector::Zero(nf), Vector::Ones(m))));
  Vector s = Vector::Ones(m);
  s[0] = 8.0 * (2.0 - 1e-4);  // tau_0 = 1e-4 < 1e-3 R
  const auto pt = b.point(Vector::Zero(nf), s);
  REQUIRE(pt.feasible);
  CHECK(b.near_wall(pt));
  const auto diag = b.diagnostics(pt);
  CHECK(diag.min_tau == doctest::Approx(1e-4));
  CHECK(diag.min_s == 1.0);
}
