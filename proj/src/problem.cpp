#include "plap/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace plap {

Vector DiscreteProblem::cost() const {
  Vector c(num_vars());
  c << c_u, c_s;
  return c;
}

std::vector<Point> nodal_normals(const Mesh& mesh) {
  std::vector<Point> normals(mesh.nodes.size(), Point{0.0, 0.0});

  // Facet -> owning element, to orient normals away from the interior.
  std::map<std::pair<Index, Index>, Index> owner;
  for (Index i = 0; i < mesh.num_elements(); ++i) {
    const auto e = mesh.element(i);
    if (mesh.dim == 1) {
      owner.emplace(std::pair{e[0], e[0]}, i);
      owner.emplace(std::pair{e[1], e[1]}, i);
    } else {
      for (int a = 0; a < 3; ++a)
        owner.emplace(std::minmax(e[a], e[(a + 1) % 3]), i);
    }
  }

  for (const auto& f : mesh.boundary) {
    if (f.marker != BoundaryMarker::neumann) continue;
    const auto it = owner.find(std::minmax(f.nodes[0], f.nodes[1]));
    if (it == owner.end()) throw Error("nodal_normals: orphan boundary facet");
    const auto e = mesh.element(it->second);
    if (mesh.dim == 1) {
      const Index other = e[0] == f.nodes[0] ? e[1] : e[0];
      const double sgn =
          mesh.nodes[f.nodes[0]][0] > mesh.nodes[other][0] ? 1.0 : -1.0;
      normals[f.nodes[0]][0] += sgn;
      continue;
    }
    const Point& a = mesh.nodes[f.nodes[0]];
    const Point& b = mesh.nodes[f.nodes[1]];
    Index opposite = e[0];
    for (Index v : e)
      if (v != f.nodes[0] && v != f.nodes[1]) opposite = v;
    const Point& c = mesh.nodes[opposite];
    double nx = b[1] - a[1], ny = a[0] - b[0];
    if (nx * (c[0] - a[0]) + ny * (c[1] - a[1]) > 0.0) {
      nx = -nx;
      ny = -ny;
    }
    const double len = std::hypot(nx, ny);
    for (Index v : f.nodes) {
      normals[v][0] += nx / len;
      normals[v][1] += ny / len;
    }
  }
  for (auto& nrm : normals) {
    const double len = std::hypot(nrm[0], nrm[1]);
    if (len > 0.0) {
      nrm[0] /= len;
      nrm[1] /= len;
    }
  }
  return normals;
}

SampledData sample(const FemOperators& ops, const ContinuousData& data) {
  SampledData out;
  const Index ndof = ops.num_dofs();
  const int dp = ops.d_prime;
  out.f = data.f ? interpolate(ops, data.f) : Vector::Zero(ndof);
  out.h = Vector::Zero(ndof);
  out.g = Vector::Zero(ndof);
  if (data.h) {
    const auto normals = nodal_normals(*ops.mesh);
    for (Index k = 0; k < ops.n; ++k) {
      if (!ops.neumann_node[k]) continue;
      const auto v = data.h(ops.mesh->nodes[k], normals[k]);
      for (int r = 0; r < dp; ++r) out.h[k * dp + r] = v[r];
    }
  }
  if (data.g) {
    for (Index k = 0; k < ops.n; ++k) {
      if (!ops.dirichlet_node[k]) continue;
      const auto v = data.g(ops.mesh->nodes[k]);
      for (int r = 0; r < dp; ++r) out.g[k * dp + r] = v[r];
    }
  }
  if (!out.f.allFinite() || !out.h.allFinite() || !out.g.allFinite())
    throw Error("sample: non-finite source or boundary values");
  return out;
}

double lq_norm_q(const FemOperators& ops, const Vector& coeffs, double q) {
  const Mesh& mesh = *ops.mesh;
  const int dp = ops.d_prime;
  const int npe = ops.nodes_per_element();
  // Same points as the mass rule: edge midpoints (2D), Gauss pair (1D).
  static constexpr double tri[3][3] = {
      {0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  static constexpr double gauss[2] = {0.21132486540518711775,
                                      0.78867513459481288225};
  double total = 0.0;
  for (Index i = 0; i < ops.m; ++i) {
    const auto e = mesh.element(i);
    const int nq = ops.d == 2 ? 3 : 2;
    for (int qp = 0; qp < nq; ++qp) {
      double phi[3];
      if (ops.d == 2) {
        for (int a = 0; a < 3; ++a) phi[a] = tri[qp][a];
      } else {
        phi[0] = 1.0 - gauss[qp];
        phi[1] = gauss[qp];
      }
      double sq = 0.0;
      for (int r = 0; r < dp; ++r) {
        double v = 0.0;
        for (int a = 0; a < npe; ++a) v += phi[a] * coeffs[e[a] * dp + r];
        sq += v * v;
      }
      total += ops.weights[i] / nq * std::pow(sq, 0.5 * q);
    }
  }
  return total;
}

RBound heuristic_R(const FemOperators& ops, double p, const Vector& f_coeffs,
                   const Vector& g_coeffs, double width) {
  if (!(p >= 2.0)) throw Error("heuristic_R: p must be >= 2");
  const double q = p / (p - 1.0);
  const double g_term = xp_norm_p(ops, g_coeffs, p);
  const double f_term = lq_norm_q(ops, f_coeffs, q);
  RBound out;
  out.R0 = 2.0 * (1.0 + g_term) + 8.0 * (p - 1.0) * std::pow(width, q) * f_term;
  out.growth = 4.0;
  return out;
}

DiscreteProblem discretize(std::shared_ptr<const FemOperators> ops,
                           const ContinuousData& data) {
  if (!(data.p >= 2.0) || !std::isfinite(data.p))
    throw Error("discretize: p must lie in [2, inf)");
  if (data.d_prime != ops->d_prime)
    throw Error("discretize: data and operators disagree on d'");
  const bool has_dirichlet =
      std::any_of(ops->dirichlet_node.begin(), ops->dirichlet_node.end(),
                  [](char c) { return c != 0; });
  if (!has_dirichlet && !data.allow_pure_neumann)
    throw Error(
        "discretize: empty Dirichlet boundary (solution defined only up to "
        "translations)");

  DiscreteProblem prob;
  prob.ops = ops;
  prob.p = data.p;
  const SampledData s = sample(*ops, data);
  prob.f_coeffs = s.f;
  prob.h_coeffs = s.h;
  prob.g_coeffs = s.g;

  const Vector load = ops->mass * s.f + ops->boundary_mass * s.h;
  prob.c_u = -ops->restrict_to_free(load);
  prob.c_s = ops->weights / data.p;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& pt : ops->mesh->nodes) {
    xmin = std::min(xmin, pt[0]);
    xmax = std::max(xmax, pt[0]);
    ymin = std::min(ymin, pt[1]);
    ymax = std::max(ymax, pt[1]);
  }
  prob.width = std::max(xmax - xmin, ymax - ymin);

  const RBound rb = heuristic_R(*ops, data.p, s.f, s.g, prob.width);
  prob.R = rb.R0;
  prob.R_growth = rb.growth;
  prob.R = initial_point(prob).R;
  return prob;
}

DiscreteProblem discretize(std::shared_ptr<const Mesh> mesh,
                           const ContinuousData& data) {
  auto ops = std::make_shared<const FemOperators>(assemble(mesh, data.d_prime));
  return discretize(std::move(ops), data);
}

InitialPoint initial_point(const DiscreteProblem& prob) {
  const FemOperators& ops = *prob.ops;
  InitialPoint x;
  x.u = Vector::Zero(prob.num_free());
  const Vector sq = apply_gradient_norms(ops, prob.g_coeffs);
  x.s.resize(ops.m);
  double cap = 0.0;
  for (Index i = 0; i < ops.m; ++i) {
    x.s[i] = 1.0 + std::pow(sq[i], 0.5 * prob.p);
    cap = std::max(cap, ops.weights[i] * x.s[i]);
  }
  x.R = prob.R;
  while (!(x.R > cap)) x.R *= prob.R_growth;
  return x;
}

double objective(const DiscreteProblem& prob, const Vector& u) {
  const Vector v = full_solution(prob, u);
  return xp_norm_p(*prob.ops, v, prob.p) / prob.p + prob.c_u.dot(u);
}

double cost_value(const DiscreteProblem& prob, const Vector& u,
                  const Vector& s) {
  return prob.c_u.dot(u) + prob.c_s.dot(s);
}

Vector full_solution(const DiscreteProblem& prob, const Vector& u) {
  return prob.ops->expand(u) + prob.g_coeffs;
}

}  // namespace plap
