#include "plap/inflimit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plap/path_following.hpp"

namespace plap {

namespace {

// Largest a in (0, hi] with phi > 0 on [0, a), phi concave, phi(0) > 0.
template <class Phi>
double concave_root(Phi&& phi, double hi) {
  if (phi(hi) > 0.0) return hi;
  double lo = 0.0;
  for (int it = 0; it < 60 && hi - lo > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

InnerNorm parse_inner_norm(std::string_view name) {
  if (name == "frobenius" || name == "fro") return InnerNorm::frobenius;
  if (name == "supremum" || name == "sup") return InnerNorm::supremum;
  throw Error("unknown inner norm '" + std::string(name) +
              "' (known: frobenius, sup)");
}

const char* to_string(InnerNorm norm) {
  return norm == InnerNorm::frobenius ? "frobenius" : "sup";
}

InfProblem make_inf_problem(const DiscreteProblem& base, InnerNorm norm) {
  InfProblem prob;
  prob.ops = base.ops;
  prob.c_u = base.c_u;
  prob.g_coeffs = base.g_coeffs;
  prob.inner_norm = norm;
  const auto& facets = base.ops->mesh->boundary;
  prob.sigma_floor =
      std::any_of(facets.begin(), facets.end(),
                  [](const BoundaryFacet& f) {
                    return f.marker == BoundaryMarker::neumann;
                  })
          ? 1.0
          : 0.0;
  return prob;
}

Vector element_norms(const FemOperators& ops, const Vector& full_coeffs,
                     InnerNorm norm) {
  const Matrix y = derivatives(ops, full_coeffs);
  if (norm == InnerNorm::frobenius) return y.rowwise().norm();
  return y.cwiseAbs().rowwise().maxCoeff();
}

double initial_sigma(const InfProblem& prob) {
  const Vector n = element_norms(*prob.ops, prob.g_coeffs, prob.inner_norm);
  const double top = n.size() > 0 ? n.maxCoeff() : 0.0;
  return std::max(top, prob.sigma_floor) + 1.0;
}

InfHessianFactor::InfHessianFactor(SpdFactor factor, Vector h_us, double h_ss)
    : factor_(std::move(factor)), h_us_(std::move(h_us)) {
  v_ = factor_.solve(h_us_);
  schur_ = h_ss - h_us_.dot(v_);
  if (!(schur_ > 0.0))
    throw SolverFailure("limit hessian: Schur complement is not positive");
}

Vector InfHessianFactor::solve(const Vector& rhs) const {
  const Index nf = h_us_.size();
  const Vector a = factor_.solve(rhs.head(nf));
  Vector out(nf + 1);
  const double ds = (rhs[nf] - h_us_.dot(a)) / schur_;
  out.head(nf) = a - ds * v_;
  out[nf] = ds;
  return out;
}

InfBarrier::InfBarrier(const InfProblem& prob, double R,
                       std::shared_ptr<const ElementPattern> pattern,
                       const HessianOptions& options)
    : prob_(prob),
      R_(R),
      pattern_(pattern ? std::move(pattern)
                       : std::make_shared<const ElementPattern>(*prob.ops,
                                                                options)) {
  if (!(R_ > prob_.sigma_floor))
    throw Error("limit barrier: R must exceed the sigma floor");
  cost_.resize(size());
  cost_ << prob_.c_u, prob_.ops->weights.sum();
}

double InfBarrier::nu() const {
  const FemOperators& ops = *prob_.ops;
  const double m = static_cast<double>(ops.m);
  if (prob_.inner_norm == InnerNorm::frobenius) return 2.0 * m + 2.0;
  return 2.0 * ops.num_derivatives() * m + 2.0;
}

InfPoint InfBarrier::point(Vector x) const {
  const FemOperators& ops = *prob_.ops;
  const Index nf = prob_.num_free();
  if (x.size() != nf + 1) throw Error("limit barrier: point has wrong length");
  InfPoint pt;
  pt.x = std::move(x);
  pt.y = derivatives(ops, ops.expand(pt.x.head(nf)) + prob_.g_coeffs);
  const double sigma = pt.sigma();
  if (prob_.inner_norm == InnerNorm::frobenius)
    pt.z = (sigma * sigma - pt.y.rowwise().squaredNorm().array()).matrix();
  else
    pt.z = (sigma - pt.y.cwiseAbs().rowwise().maxCoeff().array()).matrix();
  pt.feasible = pt.x.allFinite() && sigma > 0.0 &&
                sigma > prob_.sigma_floor && sigma < R_ &&
                (pt.z.size() == 0 || pt.z.minCoeff() > 0.0);
  return pt;
}

void InfBarrier::require_feasible(const Point& pt) const {
  if (!pt.feasible)
    throw InfeasiblePoint("limit barrier: point is outside the feasible set");
}

double InfBarrier::scalar_gradient(double sigma) const {
  return -1.0 / (sigma - prob_.sigma_floor) + 1.0 / (R_ - sigma);
}

double InfBarrier::scalar_hessian(double sigma) const {
  const double a = sigma - prob_.sigma_floor, b = R_ - sigma;
  return 1.0 / (a * a) + 1.0 / (b * b);
}

double InfBarrier::value(const Point& pt) const {
  require_feasible(pt);
  const double sigma = pt.sigma();
  double v = -std::log(sigma - prob_.sigma_floor) - std::log(R_ - sigma);
  if (prob_.inner_norm == InnerNorm::frobenius) {
    v -= pt.z.array().log().sum();
  } else {
    v -= (sigma - pt.y.array()).log().sum() + (sigma + pt.y.array()).log().sum();
  }
  return v;
}

Vector InfBarrier::gradient(const Point& pt) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const Index nf = prob_.num_free();
  const double sigma = pt.sigma();
  Matrix g_y(pt.y.rows(), pt.y.cols());
  double g_s = scalar_gradient(sigma);
  if (prob_.inner_norm == InnerNorm::frobenius) {
    for (Index i = 0; i < pt.y.rows(); ++i) {
      g_y.row(i) = 2.0 * pt.y.row(i) / pt.z[i];
      g_s -= 2.0 * sigma / pt.z[i];
    }
  } else {
    const auto a = (sigma - pt.y.array()).inverse();
    const auto b = (sigma + pt.y.array()).inverse();
    g_y = (a - b).matrix();
    g_s -= (a + b).sum();
  }
  Vector full = Vector::Zero(ops.num_dofs());
  for (int jr = 0; jr < ops.num_derivatives(); ++jr)
    full += ops.d_mats[jr].transpose() * g_y.col(jr);
  Vector g(nf + 1);
  g.head(nf) = ops.restrict_to_free(full);
  g[nf] = g_s;
  return g;
}

Vector InfBarrier::hessian_apply(const Point& pt, const Vector& v) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const Index nf = prob_.num_free(), m = ops.m;
  const int nd = ops.num_derivatives();
  const double sigma = pt.sigma(), vs = v[nf];
  const Matrix delta = derivatives(ops, ops.expand(v.head(nf)));
  Matrix w(m, nd);
  double out_s = scalar_hessian(sigma) * vs;
  if (prob_.inner_norm == InnerNorm::frobenius) {
    for (Index i = 0; i < m; ++i) {
      const double z = pt.z[i], z2 = z * z;
      const double yd = pt.y.row(i).dot(delta.row(i));
      w.row(i) = 2.0 * delta.row(i) / z +
                 (4.0 * yd / z2 - 4.0 * sigma * vs / z2) * pt.y.row(i);
      out_s += -4.0 * sigma * yd / z2 +
               (4.0 * sigma * sigma / z2 - 2.0 / z) * vs;
    }
  } else {
    const auto a2 = (sigma - pt.y.array()).square().inverse();
    const auto b2 = (sigma + pt.y.array()).square().inverse();
    const Eigen::ArrayXXd h_yy = a2 + b2, h_ys = b2 - a2;
    w = (h_yy * delta.array() + h_ys * vs).matrix();
    out_s += (h_ys * delta.array()).sum() + h_yy.sum() * vs;
  }
  Vector full = Vector::Zero(ops.num_dofs());
  for (int jr = 0; jr < nd; ++jr) full += ops.d_mats[jr].transpose() * w.col(jr);
  Vector out(nf + 1);
  out.head(nf) = ops.restrict_to_free(full);
  out[nf] = out_s;
  return out;
}

InfHessianFactor InfBarrier::factor(const Point& pt) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const ElementPattern& pat = *pattern_;
  const Index m = ops.m;
  const int dp = ops.d_prime, d = ops.d, npe = ops.nodes_per_element();
  const int nd = ops.num_derivatives();
  const double sigma = pt.sigma();
  const bool fro = prob_.inner_norm == InnerNorm::frobenius;

  SparseMatrix K = pat.zero_matrix();
  Matrix local(pat.local_size(), pat.local_size());
  Matrix h_ys(m, nd);
  double h_ss = scalar_hessian(sigma);
  Vector b(pat.local_size());
  for (Index i = 0; i < m; ++i) {
    local.setZero();
    if (fro) {
      const double z = pt.z[i], z2 = z * z;
      for (int a = 0; a < npe; ++a)
        for (int r = 0; r < dp; ++r) {
          double acc = 0.0;
          for (int j = 0; j < d; ++j) acc += ops.grad(i, a, j) * pt.y(i, j * dp + r);
          b[a * dp + r] = acc;
        }
      local.noalias() = (4.0 / z2) * b * b.transpose();
      for (int a = 0; a < npe; ++a)
        for (int c = 0; c < npe; ++c) {
          double g = 0.0;
          for (int j = 0; j < d; ++j) g += ops.grad(i, a, j) * ops.grad(i, c, j);
          for (int r = 0; r < dp; ++r) local(a * dp + r, c * dp + r) += 2.0 / z * g;
        }
      h_ys.row(i) = (-4.0 * sigma / z2) * pt.y.row(i);
      h_ss += 4.0 * sigma * sigma / z2 - 2.0 / z;
    } else {
      for (int j = 0; j < d; ++j)
        for (int r = 0; r < dp; ++r) {
          const double y = pt.y(i, j * dp + r);
          const double a2 = 1.0 / ((sigma - y) * (sigma - y));
          const double b2 = 1.0 / ((sigma + y) * (sigma + y));
          h_ys(i, j * dp + r) = b2 - a2;
          h_ss += a2 + b2;
          for (int a = 0; a < npe; ++a)
            for (int c = 0; c < npe; ++c)
              local(a * dp + r, c * dp + r) +=
                  (a2 + b2) * ops.grad(i, a, j) * ops.grad(i, c, j);
        }
    }
    pat.add(K, i, local);
  }
  Vector full = Vector::Zero(ops.num_dofs());
  for (int jr = 0; jr < nd; ++jr)
    full += ops.d_mats[jr].transpose() * h_ys.col(jr);
  return InfHessianFactor(SpdFactor(pat, std::move(K)),
                          ops.restrict_to_free(full), h_ss);
}

double InfBarrier::max_step(const Point& pt, const Vector& dx,
                            double limit) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const Index nf = prob_.num_free();
  const double sigma = pt.sigma(), ds = dx[nf];
  double alpha = limit;
  if (ds < 0.0) alpha = std::min(alpha, (prob_.sigma_floor - sigma) / ds);
  if (ds > 0.0) alpha = std::min(alpha, (R_ - sigma) / ds);
  const Matrix dy = derivatives(ops, ops.expand(dx.head(nf)));
  for (Index i = 0; i < ops.m; ++i) {
    if (prob_.inner_norm == InnerNorm::frobenius) {
      // sigma - |y| is concave along the line.
      const auto y = pt.y.row(i);
      const auto dyi = dy.row(i);
      auto phi = [&](double a) {
        return sigma + a * ds - (y + a * dyi).norm();
      };
      alpha = std::min(alpha, concave_root(phi, alpha));
    } else {
      for (Index e = 0; e < dy.cols(); ++e) {
        const double y = pt.y(i, e), dyv = dy(i, e);
        // sigma - y > 0 and sigma + y > 0 are linear in a.
        if (ds - dyv < 0.0) alpha = std::min(alpha, (sigma - y) / (dyv - ds));
        if (ds + dyv < 0.0) alpha = std::min(alpha, (sigma + y) / -(ds + dyv));
      }
    }
  }
  return alpha;
}

bool InfBarrier::cap_active(const Point& pt) const {
  return R_ - pt.sigma() < 1e-3 * R_;
}

PointDiagnostics InfBarrier::diagnostics(const Point& pt) const {
  return {pt.z.size() > 0 ? pt.z.minCoeff() : 0.0, R_ - pt.sigma(),
          pt.sigma() - prob_.sigma_floor};
}

SolveReport solve_inf(const InfProblem& prob, const SolverConfig& cfg) {
  cfg.validate();
  static_assert(PathBarrier<InfBarrier>);
  auto pattern = std::make_shared<const ElementPattern>(*prob.ops, cfg.hessian);
  const double sigma0 = initial_sigma(prob);
  double R = prob.R > 0.0 ? prob.R : 4.0 * sigma0;
  if (!(R > sigma0)) throw Error("limit solve: R must exceed the start sigma");
  const FemOperators& ops = *prob.ops;
  const Index nf = prob.num_free();
  SolveReport report;
  int total = 0;
  for (int restart = 0;; ++restart) {
    const InfBarrier barrier(prob, R, pattern);
    Vector x0 = Vector::Zero(nf + 1);
    x0[nf] = sigma0;
    path::Engine<InfBarrier> engine(barrier, cfg, total, restart);
    auto out = engine.run(barrier.point(std::move(x0)));
    report.newton_iters_aux += out.aux_steps;
    report.newton_iters_main += out.main_steps;
    if (!barrier.cap_active(out.point)) {
      report.restarts = restart;
      report.R = R;
      report.t_final = out.t;
      report.final_decrement = out.lambda;
      report.gap_bound = path::gap_bound(barrier.nu(), out.t, out.lambda);
      report.u_free = out.point.x.head(nf);
      report.s = out.point.x.tail(1);
      report.u = ops.expand(report.u_free) + prob.g_coeffs;
      report.cost = barrier.cost().dot(out.point.x);
      report.objective =
          element_norms(ops, report.u, prob.inner_norm).maxCoeff() +
          prob.c_u.dot(report.u_free);
      return report;
    }
    if (restart + 1 > cfg.max_restarts)
      throw SolverFailure("limit solve: R restart limit (" +
                          std::to_string(cfg.max_restarts) + ") exceeded");
    R *= prob.R_growth;
  }
}

}  // namespace plap
