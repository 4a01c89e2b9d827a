#include <doctest.h>

#include <Eigen/Dense>

#include "plap/inflimit.hpp"
#include "support.hpp"

using namespace plap;
using namespace plap::testing;

namespace {

InfProblem limit_problem(unsigned free_sides, int d_prime, InnerNorm norm,
                         const VectorFn& g = {}) {
  ContinuousData data;
  data.d_prime = d_prime;
  data.g = g;
  const auto base =
      discretize(std::make_shared<const Mesh>(unit_square(4, free_sides)), data);
  return make_inf_problem(base, norm);
}

// Random u, sigma above the largest element norm and the floor.
Vector random_limit_point(const InfProblem& prob, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  const Index nf = prob.num_free();
  Vector x(nf + 1);
  for (Index i = 0; i < nf; ++i) x[i] = U(rng);
  const Vector norms = element_norms(
      *prob.ops, prob.ops->expand(x.head(nf)) + prob.g_coeffs, prob.inner_norm);
  x[nf] = std::max(norms.maxCoeff(), prob.sigma_floor) + 0.2 + std::abs(U(rng));
  return x;
}

}  // namespace

TEST_CASE("inner norm names") {
  CHECK(parse_inner_norm("frobenius") == InnerNorm::frobenius);
  CHECK(parse_inner_norm("fro") == InnerNorm::frobenius);
  CHECK(parse_inner_norm("sup") == InnerNorm::supremum);
  CHECK(parse_inner_norm("supremum") == InnerNorm::supremum);
  CHECK_THROWS_AS(parse_inner_norm("max"), Error);
  CHECK(std::string(to_string(InnerNorm::supremum)) == "sup");
}

TEST_CASE("floor depends on Neumann facets") {
  CHECK(limit_problem(side_left, 1, InnerNorm::frobenius).sigma_floor == 1.0);
  CHECK(limit_problem(side_none, 1, InnerNorm::frobenius).sigma_floor == 0.0);
}

TEST_CASE("element norms of a linear field") {
  const auto ops = assemble(std::make_shared<const Mesh>(unit_square(3)), 2);
  const Vector v = interpolate(ops, [](const Point& x) {
    return Pair{3.0 * x[0], -4.0 * x[1]};
  });
  const Vector fro = element_norms(ops, v, InnerNorm::frobenius);
  const Vector sup = element_norms(ops, v, InnerNorm::supremum);
  for (Index i = 0; i < ops.m; ++i) {
    CHECK(fro[i] == doctest::Approx(5.0));
    CHECK(sup[i] == doctest::Approx(4.0));
  }
}

TEST_CASE("limit barrier derivatives match finite differences") {
  std::mt19937 rng(17);
  for (auto norm : {InnerNorm::frobenius, InnerNorm::supremum}) {
    for (int dp : {1, 2}) {
      CAPTURE(dp);
      const auto prob = limit_problem(side_left | side_top, dp, norm,
                                      [](const Point& x) {
                                        return Pair{x[0] * x[1], x[0] - x[1]};
                                      });
      for (int trial = 0; trial < 3; ++trial) {
        const Vector x = random_limit_point(prob, rng);
        const InfBarrier b(prob, 4.0 * x[x.size() - 1]);
        const auto pt = b.point(x);
        REQUIRE(pt.feasible);
        const Vector g = b.gradient(pt);
        CHECK(relative_error(fd_gradient(b, x), g) < 1e-5);
        const Vector v = Vector::Random(b.size());
        const double h = 1e-4 * b.max_step(pt, v, 1.0);
        CHECK(relative_error(fd_hessian_apply(b, x, v, h), b.hessian_apply(pt, v)) <
              1e-4);

        Matrix H(b.size(), b.size());
        for (Index k = 0; k < b.size(); ++k)
          H.col(k) = b.hessian_apply(pt, Vector::Unit(b.size(), k));
        const Vector rhs = Vector::Random(b.size());
        const auto F = b.factor(pt);
        CHECK(relative_error(F.solve(rhs), H.ldlt().solve(rhs)) < 1e-8);
        CHECK(g.dot(F.solve(g)) <= b.nu() + 1e-8);
      }
    }
  }
}

TEST_CASE("limit max_step stops at the boundary") {
  std::mt19937 rng(23);
  for (auto norm : {InnerNorm::frobenius, InnerNorm::supremum}) {
    const auto prob = limit_problem(side_left | side_top, 2, norm);
    const Vector x = random_limit_point(prob, rng);
    const InfBarrier b(prob, 4.0 * x[x.size() - 1]);
    const auto pt = b.point(x);
    Vector dx = 5.0 * Vector::Random(b.size());
    dx[dx.size() - 1] = -1.0;
    const double a = b.max_step(pt, dx, 1e6);
    REQUIRE(a < 1e6);
    CHECK(b.point(Vector(x + 0.999 * a * dx)).feasible);
    CHECK_FALSE(b.point(Vector(x + 1.001 * a * dx)).feasible);
  }
}

TEST_CASE("zero data with Neumann facets drives sigma to the floor") {
  for (auto norm : {InnerNorm::frobenius, InnerNorm::supremum}) {
    const auto prob = limit_problem(side_left | side_top, 2, norm);
    const auto rep = solve_inf(prob);
    REQUIRE(rep.s.size() == 1);
    CHECK(rep.s[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(rep.cost == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(rep.u_free.cwiseAbs().maxCoeff() < 1e-4);
    CHECK(rep.gap_bound <= 1e-6);
  }
}

TEST_CASE("linear Dirichlet data is reproduced with a tight bound") {
  // g = x1 on the whole boundary: the optimal Lipschitz bound is 1 and the
  // interpolant of g attains it on every element.
  const auto prob = limit_problem(side_none, 1, InnerNorm::frobenius,
                                  [](const Point& x) { return Pair{x[0], 0.0}; });
  const auto rep = solve_inf(prob);
  CHECK(rep.s[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-5));
  const Vector norms = element_norms(*prob.ops, rep.u, InnerNorm::frobenius);
  CHECK(norms.maxCoeff() <= rep.s[0] + 1e-12);
  CHECK(rep.u_free.cwiseAbs().maxCoeff() < 1.0 + 1e-9);
}

TEST_CASE("start sigma and infeasible points") {
  const auto prob = limit_problem(side_left, 1, InnerNorm::supremum,
                                  [](const Point& x) { return Pair{3.0 * x[1], 0.0}; });
  // Dirichlet-only nodes carry g; the top-left corner region sees slope 3 at most.
  CHECK(initial_sigma(prob) >= 2.0);
  const InfBarrier b(prob, 10.0);
  Vector x = Vector::Zero(prob.num_free() + 1);
  x[x.size() - 1] = 0.5;  // below the floor
  CHECK_FALSE(b.point(x).feasible);
  CHECK_THROWS_AS(b.value(b.point(x)), InfeasiblePoint);
  x[x.size() - 1] = 11.0;  // above the cap
  CHECK_FALSE(b.point(x).feasible);
}
