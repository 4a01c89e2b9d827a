#include "plap/barrier.hpp"

#include <cmath>
#include <limits>

namespace plap {

namespace {

constexpr double kMinS = 1e-300;

// Largest a in (0, hi] with phi(a') > 0 on [0, a), for phi concave with
// phi(0) > 0. Bisection keeps the returned value on the feasible side.
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

PBarrier::PBarrier(const DiscreteProblem& prob, double R,
                   std::shared_ptr<const ElementPattern> pattern,
                   const HessianOptions& options)
    : prob_(prob),
      R_(R > 0.0 ? R : prob.R),
      pattern_(pattern ? std::move(pattern)
                       : std::make_shared<const ElementPattern>(*prob.ops,
                                                                options)),
      cost_(prob.cost()),
      w_max_(prob.ops->weights.maxCoeff()) {
  prob_.R = R_;
}

BarrierPoint PBarrier::point(Vector x) const {
  const FemOperators& ops = *prob_.ops;
  const Index nf = num_free(), m = num_elements();
  if (x.size() != nf + m) throw Error("barrier: point has wrong length");
  BarrierPoint pt;
  pt.x = std::move(x);
  const Vector v = ops.expand(pt.x.head(nf)) + prob_.g_coeffs;
  pt.y = derivatives(ops, v);
  pt.s_pow.resize(m);
  pt.z.resize(m);
  pt.tau.resize(m);
  const double expo = 2.0 / prob_.p;
  bool ok = pt.x.allFinite();
  for (Index i = 0; i < m; ++i) {
    const double s = pt.x[nf + i];
    const bool s_ok = s > kMinS;
    pt.s_pow[i] = s_ok ? std::exp(expo * std::log(s)) : 0.0;
    pt.z[i] = pt.s_pow[i] - pt.y.row(i).squaredNorm();
    pt.tau[i] = R_ - ops.weights[i] * s;
    ok = ok && s_ok && pt.z[i] > 0.0 && pt.tau[i] > 0.0;
  }
  pt.feasible = ok;
  return pt;
}

BarrierPoint PBarrier::point(const Vector& u, const Vector& s) const {
  Vector x(u.size() + s.size());
  x << u, s;
  return point(std::move(x));
}

void PBarrier::require_feasible(const Point& pt) const {
  if (!pt.feasible)
    throw InfeasiblePoint("barrier: point is outside the feasible set");
}

double PBarrier::value(const Point& pt) const {
  require_feasible(pt);
  return -(pt.z.array().log().sum() + pt.tau.array().log().sum());
}

Vector PBarrier::gradient(const Point& pt) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const Index nf = num_free(), m = num_elements();
  Vector full = Vector::Zero(ops.num_dofs());
  for (int jr = 0; jr < ops.num_derivatives(); ++jr)
    full += ops.d_mats[jr].transpose() *
            (2.0 * pt.y.col(jr).cwiseQuotient(pt.z)).eval();
  Vector g(nf + m);
  g.head(nf) = ops.restrict_to_free(full);
  const double p = prob_.p;
  const Vector s = pt.x.tail(m);
  for (Index i = 0; i < m; ++i)
    g[nf + i] = -(2.0 / p) * (pt.s_pow[i] / s[i]) / pt.z[i] +
                ops.weights[i] / pt.tau[i];
  return g;
}

Vector PBarrier::hessian_apply(const Point& pt, const Vector& v) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const Index nf = num_free(), m = num_elements();
  const int nd = ops.num_derivatives();
  const double p = prob_.p;
  const Vector s = pt.x.tail(m);
  const Vector vs = v.tail(m);
  const Matrix delta = derivatives(ops, ops.expand(v.head(nf)));

  // sum_{jr} y_jr * delta_jr per element
  const Vector ydelta = (pt.y.cwiseProduct(delta)).rowwise().sum();
  const Vector z2 = pt.z.cwiseProduct(pt.z);
  const Vector ds = (pt.s_pow.array() / s.array()).matrix();  // s^(2/p-1)

  Vector full = Vector::Zero(ops.num_dofs());
  for (int jr = 0; jr < nd; ++jr) {
    Vector w(m);
    for (Index i = 0; i < m; ++i)
      w[i] = 2.0 * delta(i, jr) / pt.z[i] +
             4.0 * pt.y(i, jr) * ydelta[i] / z2[i] -
             (4.0 / p) * pt.y(i, jr) * ds[i] * vs[i] / z2[i];
    full += ops.d_mats[jr].transpose() * w;
  }
  Vector out(nf + m);
  out.head(nf) = ops.restrict_to_free(full);
  for (Index i = 0; i < m; ++i) {
    const double si = s[i], sp = pt.s_pow[i], z = pt.z[i];
    const double f_ss = (4.0 / (p * p)) * sp * sp / (si * si * z2[i]) -
                        (2.0 / p) * (2.0 / p - 1.0) * sp / (si * si * z) +
                        ops.weights[i] * ops.weights[i] / (pt.tau[i] * pt.tau[i]);
    out[nf + i] = -(4.0 / p) * ds[i] / z2[i] * ydelta[i] + f_ss * vs[i];
  }
  return out;
}

PHessianFactor PBarrier::factor(const Point& pt) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const ElementPattern& pat = *pattern_;
  const Index m = num_elements(), nf = num_free();
  const int dp = ops.d_prime, d = ops.d, npe = ops.nodes_per_element();
  const int L = pat.local_size();
  const double p = prob_.p;

  Vector d_ss(m), c_us(m);
  Matrix b_local(L, m);
  SparseMatrix K = pat.zero_matrix();
  Matrix local(L, L);
  Matrix G(npe, npe);
  for (Index i = 0; i < m; ++i) {
    const double s = pt.x[nf + i], sp = pt.s_pow[i], z = pt.z[i];
    const double w = ops.weights[i], tau = pt.tau[i];
    const double lead = (4.0 / (p * p)) * sp * sp / (s * s * z * z);
    const double rest = (2.0 / p) * (1.0 - 2.0 / p) * sp / (s * s * z) +
                        w * w / (tau * tau);
    d_ss[i] = lead + rest;
    c_us[i] = -(4.0 / p) * (sp / s) / (z * z);
    // 4/z^2 - c_us^2 / d_ss, rewritten without cancellation.
    const double bb = 4.0 * rest / (z * z * d_ss[i]);

    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b) {
        double g = 0.0;
        for (int j = 0; j < d; ++j) g += ops.grad(i, a, j) * ops.grad(i, b, j);
        G(a, b) = g;
      }
    for (int a = 0; a < npe; ++a)
      for (int r = 0; r < dp; ++r) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += ops.grad(i, a, j) * pt.y(i, j * dp + r);
        b_local(a * dp + r, i) = acc;
      }
    local.noalias() = bb * b_local.col(i) * b_local.col(i).transpose();
    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b)
        for (int r = 0; r < dp; ++r)
          local(a * dp + r, b * dp + r) += 2.0 / z * G(a, b);
    pat.add(K, i, local);
  }
  return PHessianFactor(*this, SpdFactor(pat, std::move(K)), std::move(d_ss),
                        std::move(c_us), std::move(b_local));
}

PHessianFactor::PHessianFactor(const PBarrier& barrier, SpdFactor factor,
                               Vector d_ss, Vector c_us, Matrix b_local)
    : barrier_(&barrier),
      factor_(std::move(factor)),
      d_ss_(std::move(d_ss)),
      c_us_(std::move(c_us)),
      b_local_(std::move(b_local)) {}

Vector PHessianFactor::solve(const Vector& rhs) const {
  const ElementPattern& pat = *barrier_->pattern_;
  const Index nf = barrier_->num_free(), m = barrier_->num_elements();
  const int L = pat.local_size();
  Vector red = rhs.head(nf);
  for (Index i = 0; i < m; ++i) {
    const double w = c_us_[i] * rhs[nf + i] / d_ss_[i];
    for (int l = 0; l < L; ++l)
      if (const Index f = pat.local_free(i, l); f >= 0)
        red[f] -= b_local_(l, i) * w;
  }
  Vector out(nf + m);
  out.head(nf) = factor_.solve(red);
  for (Index i = 0; i < m; ++i) {
    double bu = 0.0;
    for (int l = 0; l < L; ++l)
      if (const Index f = pat.local_free(i, l); f >= 0)
        bu += b_local_(l, i) * out[f];
    out[nf + i] = (rhs[nf + i] - c_us_[i] * bu) / d_ss_[i];
  }
  return out;
}

double PBarrier::max_step(const Point& pt, const Vector& dx,
                          double limit) const {
  require_feasible(pt);
  const FemOperators& ops = *prob_.ops;
  const Index nf = num_free(), m = num_elements();
  const Matrix dy = derivatives(ops, ops.expand(dx.head(nf)));
  const double expo = 2.0 / prob_.p;
  double alpha = limit;
  for (Index i = 0; i < m; ++i) {
    const double s = pt.x[nf + i], ds = dx[nf + i];
    double hi = alpha;
    if (ds < 0.0) hi = std::min(hi, -s / ds);
    if (ds > 0.0) hi = std::min(hi, pt.tau[i] / (ops.weights[i] * ds));
    const auto y = pt.y.row(i);
    const auto dyi = dy.row(i);
    auto phi = [&](double a) {
      const double sa = s + a * ds;
      if (!(sa > kMinS)) return -1.0;
      return std::exp(expo * std::log(sa)) - (y + a * dyi).squaredNorm();
    };
    alpha = std::min(alpha, concave_root(phi, hi));
  }
  return alpha;
}

bool PBarrier::near_wall(const Point& pt) const {
  const auto& w = prob_.ops->weights;
  for (Index i = 0; i < num_elements(); ++i)
    if (pt.tau[i] * w_max_ < 1e-3 * R_ * w[i]) return true;
  return false;
}

PointDiagnostics PBarrier::diagnostics(const Point& pt) const {
  return {pt.z.minCoeff(), pt.tau.minCoeff(),
          pt.x.tail(num_elements()).minCoeff()};
}

}  // namespace plap
