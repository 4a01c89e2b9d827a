// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "plap/experiments.hpp"
#include "support.hpp"

using namespace plap;
using namespace plap::testing;

namespace {

constexpr double kEps = 1e-6;

int failures = 0;
std::map<int, bool> verdicts;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  verdicts[id] = ok;
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Newton ceiling 14.4 sqrt(4m) 50 for a problem with m elements.
double newton_ceiling(Index m) {
  return 14.4 * std::sqrt(4.0 * static_cast<double>(m)) * 50.0;
}

struct CeilingLog {
  int cells = 0;
  int violations = 0;
  double worst_ratio = 0.0;

  void add(int newton, Index m) {
    ++cells;
    const double ratio = newton / newton_ceiling(m);
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 1.0) ++violations;
  }
};

CeilingLog ceiling;

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t q = i; q <= j; ++q) r[idx[q]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

void criteria_1_and_2() {
  std::mt19937 rng(2024);
  double worst_grad = 0.0, worst_hess = 0.0, worst_nu = -1e300;
  int points = 0;
  for (int dp : {1, 2}) {
    for (double p : {2.0, 3.0, 8.0}) {
      const auto prob = rich_problem(4, p, dp);
      for (int trial = 0; trial < 20; ++trial) {
        const auto rp = random_point(prob, rng);
        const PBarrier b(prob, rp.R);
        const auto pt = b.point(rp.x);
        if (!pt.feasible) {
          report(1, false, "random point not feasible");
          return;
        }
        const Vector g = b.gradient(pt);
        worst_grad = std::max(worst_grad, relative_error(fd_gradient(b, rp.x), g));
        const Vector v = Vector::Random(b.size());
        const double h = 1e-4 * b.max_step(pt, v, 1.0);
        worst_hess = std::max(
            worst_hess, relative_error(fd_hessian_apply(b, rp.x, v, h),
                                       b.hessian_apply(pt, v)));
        const double lam2 = g.dot(b.factor(pt).solve(g));
        worst_nu = std::max(worst_nu, lam2 - b.nu());
        ++points;
      }
    }
  }
  report(1, worst_grad <= 1e-5 && worst_hess <= 1e-4,
         std::to_string(points) + " points, max gradient rel err " +
             fmt("%.2e", worst_grad) + " (<= 1e-5), max Hessian-vector rel err " +
             fmt("%.2e", worst_hess) + " (<= 1e-4)");
  report(2, worst_nu <= 1e-8,
         "max <F',F''^-1 F'> - 4m = " + fmt("%.3e", worst_nu) + " (<= 1e-8)");
}

void criterion_3() {
  const Case& c = find_case("manufactured");
  SolverConfig cfg;
  cfg.eps = kEps;
  double worst = 0.0;
  for (int k : {24, 49}) {
    const auto prob = discretize(c.mesh(k), c.data(2.0, 1.0));
    const auto rep = solve(prob, cfg);
    ceiling.add(rep.newton_iters(), prob.num_elements());
    worst = std::max(worst,
                     (rep.u - direct_p2_solution(prob)).cwiseAbs().maxCoeff());
  }
  report(3, worst <= 10.0 * kEps,
         "max |u_ipm - u_direct| = " + fmt("%.3e", worst) + " (<= 1e-5)");
}

void criterion_4() {
  SolverConfig cfg;
  cfg.eps = kEps;
  bool ok = true;
  std::string detail;
  double worst_asym = 0.0;
  for (double p : {2.0, 3.0, 5.0}) {
    double previous = std::numeric_limits<double>::infinity();
    detail += "p=" + fmt("%g", p) + ":";
    for (int k : {24, 49, 99}) {
      const auto r = run_validation(k, p, cfg);
      ceiling.add(r.solve.newton_iters(), 2 * k * k);
      const double err = std::max(r.max_error[0], r.max_error[1]);
      detail += " " + fmt("%.2e", err);
      ok = ok && err < previous;
      previous = err;
      worst_asym = std::max(worst_asym, r.component_asymmetry);
    }
    detail += "; ";
  }
  ok = ok && worst_asym <= 1e-10;
  report(4, ok,
         "max nodal error at n=625,2500,10000 " + detail +
             "component asymmetry " + fmt("%.2e", worst_asym) + " (<= 1e-10)");
}

// Reference Newton counts for n = 2500 and 10000.
const std::map<std::string, std::map<long, std::vector<int>>> kReferenceTable{
    {"scalar-hat",
     {{2500, {95, 95, 92, 118, 191, 233}}, {10000, {102, 104, 103, 213, 253, 308}}}},
    {"hat-normal",
     {{2500, {94, 93, 92, 86, 111, 152}}, {10000, {101, 101, 102, 99, 126, 204}}}},
    {"hat-ones",
     {{2500, {95, 96, 98, 186, 204, 280}}, {10000, {104, 107, 129, 204, 278, 361}}}},
};
const std::vector<double> kTablePs{2, 3, 5, 8, 15, 25};

void criteria_5_6_8() {
  struct Column {
    std::string name;
    long n;
    std::vector<double> ps;
  };
  const std::vector<Column> columns{
      {"scalar-hat", 2500, kTablePs},
      {"scalar-hat", 10000, kTablePs},
      {"hat-normal", 2500, kTablePs},
      {"hat-ones", 2500, kTablePs},
      {"hat-normal", 10000, {25.0}},  // cited spot value
  };
  bool band_ok = true, trend_ok = true, p25_ok = true;
  std::string detail, p25_detail;
  for (const auto& col : columns) {
    TableSpec spec;
    spec.cases = {col.name};
    spec.ps = col.ps;
    spec.ns = {col.n};
    spec.cfg.eps = kEps;
    const auto cells = run_table(spec);
    std::vector<double> counts;
    detail += col.name + " n=" + std::to_string(col.n) + ":";
    for (const auto& cell : cells) {
      const std::size_t col_idx =
          std::find(kTablePs.begin(), kTablePs.end(), cell.p) - kTablePs.begin();
      const int ref = kReferenceTable.at(col.name).at(col.n)[col_idx];
      if (!cell.ok) {
        band_ok = false;
        detail += " p" + fmt("%g", cell.p) + "=fail";
        continue;
      }
      ceiling.add(cell.newton_total(), 2 * static_cast<Index>(
                                               std::lround(std::sqrt(cell.n)) - 1) *
                                           (std::lround(std::sqrt(cell.n)) - 1));
      const bool in_band = cell.newton_total() * 3 >= ref &&
                           cell.newton_total() <= 3 * ref;
      band_ok = band_ok && in_band;
      detail += " " + std::to_string(cell.newton_total()) + "/" +
                std::to_string(ref) + (in_band ? "" : "!");
      counts.push_back(cell.newton_total());
      if (cell.p == 25.0 && cell.n == 2500) {
        const bool conv = cell.gap_bound <= kEps;
        p25_ok = p25_ok && conv;
        p25_detail += " " + col.name + " gap " + fmt("%.3e", cell.gap_bound);
      }
    }
    if (col.ps.size() > 1) {
      const double rho = counts.size() == col.ps.size()
                             ? spearman(col.ps, counts)
                             : -1.0;
      trend_ok = trend_ok && rho > 0.0;
      detail += " (spearman " + fmt("%.2f", rho) + ")";
    }
    detail += "; ";
  }
  report(5, band_ok && trend_ok,
         "ours/reference Newton counts (band x[1/3,3], positive rank trend in p) " +
             detail);
  report(8, p25_ok, "p=25, n=2500 converged with gap <= 1e-6:" + p25_detail);
}

void criterion_9() {
  DeformationSpec spec;
  spec.case_name = "hat-normal";
  spec.ps = {2.0, 5.0, 15.0};
  spec.k = 49;
  spec.t = 1.0;
  spec.near_radius = 0.1;
  spec.cfg.eps = kEps;
  const auto res = run_deformation(spec);
  for (const auto& r : res) ceiling.add(r.solve.newton_iters(), 2 * 49 * 49);
  const double a2 = res[0].near_after.min_angle, a15 = res[2].near_after.min_angle;
  const double v2 = res[0].max_displacement, v5 = res[1].max_displacement;
  report(9, a15 > a2 && v5 > v2,
         "min angle near free ends p=2 " + fmt("%.3f", a2) + " deg, p=15 " +
             fmt("%.3f", a15) + " deg; max |v| p=2 " + fmt("%.4f", v2) +
             ", p=5 " + fmt("%.4f", v5));
}

void criterion_10() {
  SolverConfig cfg;
  cfg.eps = kEps;
  const auto res = oned_limit("oned-const", 1.0, {2.0, 5.0, 15.0, 25.0}, 200, cfg);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < res.size(); ++i) {
    ceiling.add(res[i].solve.newton_iters(), 200);
    detail += " p=" + fmt("%g", res[i].p) + ": " + fmt("%.4f", res[i].sup_distance);
    if (i > 0) ok = ok && res[i].sup_distance <= res[i - 1].sup_distance;
  }
  ok = ok && res.back().sup_distance <= 0.1;
  report(10, ok, "sup distance to the tent" + detail + " (non-increasing, <= 0.1 at p=25)");
}

void criterion_7() {
  SolverConfig cfg;
  cfg.eps = kEps;
  double worst = 0.0;
  int cases = 0;
  for (int k : {2, 3, 4}) {
    for (double p : {2.0, 4.0}) {
      std::vector<double> f(k + 1);
      for (int i = 0; i <= k; ++i) f[i] = std::cos(1.0 + 2.0 * i) * 2.0;
      ContinuousData data;
      data.p = p;
      data.f = [&f, k](const Point& x) {
        return Pair{f[static_cast<std::size_t>(std::lround(x[0] * k))], 0.0};
      };
      const auto prob =
          discretize(std::make_shared<const Mesh>(unit_interval(k)), data);
      const auto rep = solve(prob, cfg);
      ceiling.add(rep.newton_iters(), k);
      const double best = grid_search_min(
          k - 1, -2.0, 2.0,
          [&](const std::vector<double>& u) { return oned_energy(u, p, f); });
      worst = std::max(worst, std::abs(rep.objective - best));
      ++cases;
    }
  }
  report(7, worst <= 1e-4,
         std::to_string(cases) + " instances, max |J_ipm - J_grid| = " +
             fmt("%.2e", worst) + " (<= 1e-4)");
}

void criterion_11() {
  SolverConfig cfg;
  cfg.eps = kEps;
  const auto visc = run_inf("viscosity", 49, InnerNorm::frobenius, cfg);
  const double err = visc.exact_error.value_or(0.0);
  const auto sup = run_inf("hat-normal", 49, InnerNorm::supremum, cfg);
  // Tightness on every element owning a Neumann facet, and unit slope along
  // every Neumann edge.
  const bool tight = sup.boundary_min_norm >= sup.sigma - 1e-4;
  const bool slope = std::abs(sup.boundary_slope_min - 1.0) <= 1e-3 &&
                     std::abs(sup.boundary_slope_max - 1.0) <= 1e-3;
  report(11, err > 1e-2 && tight && slope,
         "frobenius vs x1^(4/3)-x2^(4/3): max error " + fmt("%.4f", err) +
             " (> 1e-2, reference not reproduced); sup norm: sigma " +
             fmt("%.6f", sup.sigma) + ", boundary elements min norm " +
             fmt("%.6f", sup.boundary_min_norm) + ", boundary slope in [" +
             fmt("%.6f", sup.boundary_slope_min) + ", " +
             fmt("%.6f", sup.boundary_slope_max) + "]");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  auto timed = [](auto&& fn) {
    const auto s = std::chrono::steady_clock::now();
    fn();
    std::printf("      (%.1f s)\n",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - s)
                    .count());
  };
  try {
    timed(criteria_1_and_2);
    timed(criterion_3);
    timed(criterion_4);
    timed(criteria_5_6_8);
    timed(criterion_7);
    timed(criterion_9);
    timed(criterion_10);
    timed(criterion_11);
    report(6, ceiling.violations == 0,
           std::to_string(ceiling.cells) +
               " solved cells, max Newton total / (14.4 sqrt(4m) 50) = " +
               fmt("%.4f", ceiling.worst_ratio));
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  std::printf("summary:");
  for (const auto& [id, ok] : verdicts) std::printf(" %d=%s", id, ok ? "PASS" : "FAIL");
  std::printf("\ntotal %.1f s, %d failed\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count(),
              failures);
  return failures == 0 ? 0 : 1;
}
