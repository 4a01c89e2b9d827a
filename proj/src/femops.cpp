#include "plap/femops.hpp"

#include <cmath>

namespace plap {

namespace {

using Triplet = Eigen::Triplet<double, int>;

// Degree-2 exact rule on a triangle: edge midpoints, weight |T|/3 each.
// Barycentric coordinates of the three midpoints.
constexpr double kTriMidpoints[3][3] = {
    {0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};

// Two-point Gauss on [0,1], exact to degree 3.
constexpr double kGaussNodes[2] = {0.21132486540518711775,
                                   0.78867513459481288225};

// Adds w * E_q^T E_q for one quadrature point with barycentric values phi,
// replicated over image dimensions.
void add_point_mass(std::vector<Triplet>& trips, std::span<const Index> nodes,
                    std::span<const double> phi, double w, int d_prime) {
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b)
      for (int r = 0; r < d_prime; ++r)
        trips.emplace_back(static_cast<int>(nodes[a] * d_prime + r),
                           static_cast<int>(nodes[b] * d_prime + r),
                           w * phi[a] * phi[b]);
}

}  // namespace

Vector FemOperators::expand(const Vector& free_values) const {
  Vector full = Vector::Zero(num_dofs());
  for (Index f = 0; f < num_free(); ++f) full[free_dofs[f]] = free_values[f];
  return full;
}

Vector FemOperators::restrict_to_free(const Vector& full) const {
  Vector out(num_free());
  for (Index f = 0; f < num_free(); ++f) out[f] = full[free_dofs[f]];
  return out;
}

FemOperators assemble(std::shared_ptr<const Mesh> mesh_ptr, int d_prime) {
  const Mesh& mesh = *mesh_ptr;
  if (d_prime != 1 && d_prime != mesh.dim)
    throw Error("assemble: d_prime must be 1 or the mesh dimension");

  FemOperators ops;
  ops.mesh = mesh_ptr;
  ops.d = mesh.dim;
  ops.d_prime = d_prime;
  ops.n = mesh.num_nodes();
  ops.m = mesh.num_elements();
  const int d = ops.d;
  const int npe = ops.nodes_per_element();
  const Index ndof = ops.num_dofs();

  ops.weights.resize(ops.m);
  ops.shape_grads.assign(static_cast<std::size_t>(ops.m) * npe * d, 0.0);

  std::vector<std::vector<Triplet>> dtrips(d * d_prime);
  std::vector<Triplet> mtrips;
  for (Index i = 0; i < ops.m; ++i) {
    const auto e = mesh.element(i);
    const double vol = mesh.signed_measure(i);
    if (!(vol > 0.0))
      throw Error("assemble: degenerate or inverted element " +
                  std::to_string(i));
    ops.weights[i] = vol;

    double* g = &ops.shape_grads[static_cast<std::size_t>(i) * npe * d];
    if (d == 1) {
      g[0] = -1.0 / vol;
      g[1] = 1.0 / vol;
    } else {
      const Point& p0 = mesh.nodes[e[0]];
      const Point& p1 = mesh.nodes[e[1]];
      const Point& p2 = mesh.nodes[e[2]];
      const double inv2a = 1.0 / (2.0 * vol);
      // grad phi_a = rot90(opposite edge) / (2|T|)
      g[0] = (p1[1] - p2[1]) * inv2a;
      g[1] = (p2[0] - p1[0]) * inv2a;
      g[2] = (p2[1] - p0[1]) * inv2a;
      g[3] = (p0[0] - p2[0]) * inv2a;
      g[4] = (p0[1] - p1[1]) * inv2a;
      g[5] = (p1[0] - p0[0]) * inv2a;
    }
    for (int j = 0; j < d; ++j)
      for (int r = 0; r < d_prime; ++r)
        for (int a = 0; a < npe; ++a)
          dtrips[j * d_prime + r].emplace_back(
              static_cast<int>(i), static_cast<int>(e[a] * d_prime + r),
              g[a * d + j]);

    if (d == 2) {
      for (const auto& bary : kTriMidpoints)
        add_point_mass(mtrips, e, bary, vol / 3.0, d_prime);
    } else {
      for (double xi : kGaussNodes) {
        const double phi[2] = {1.0 - xi, xi};
        add_point_mass(mtrips, e, phi, vol / 2.0, d_prime);
      }
    }
  }

  ops.d_mats.reserve(d * d_prime);
  for (auto& trips : dtrips) {
    SparseMatrixR D(ops.m, ndof);
    D.setFromTriplets(trips.begin(), trips.end());
    ops.d_mats.push_back(std::move(D));
  }
  ops.mass.resize(ndof, ndof);
  ops.mass.setFromTriplets(mtrips.begin(), mtrips.end());
  ops.domain_measure = ops.weights.sum();

  std::vector<Triplet> btrips;
  for (const auto& f : mesh.boundary) {
    if (f.marker != BoundaryMarker::neumann) continue;
    if (d == 1) {
      const Index nodes[1] = {f.nodes[0]};
      const double phi[1] = {1.0};
      add_point_mass(btrips, nodes, phi, 1.0, d_prime);
      ops.neumann_measure += 1.0;
      continue;
    }
    const Point& a = mesh.nodes[f.nodes[0]];
    const Point& b = mesh.nodes[f.nodes[1]];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    ops.neumann_measure += len;
    for (double xi : kGaussNodes) {
      const double phi[2] = {1.0 - xi, xi};
      add_point_mass(btrips, f.nodes, phi, len / 2.0, d_prime);
    }
  }
  ops.boundary_mass.resize(ndof, ndof);
  ops.boundary_mass.setFromTriplets(btrips.begin(), btrips.end());

  ops.dirichlet_node = mesh.dirichlet_nodes();
  ops.neumann_node = mesh.nodes_with_marker(BoundaryMarker::neumann);
  ops.dof_to_free.assign(ndof, -1);
  for (Index k = 0; k < ops.n; ++k) {
    if (ops.dirichlet_node[k]) continue;
    for (int r = 0; r < d_prime; ++r) {
      ops.dof_to_free[k * d_prime + r] = ops.num_free();
      ops.free_dofs.push_back(k * d_prime + r);
    }
  }
  return ops;
}

Matrix derivatives(const FemOperators& ops, const Vector& coeffs) {
  if (coeffs.size() != ops.num_dofs())
    throw Error("derivatives: coefficient vector has wrong length");
  Matrix y(ops.m, ops.num_derivatives());
  for (int jr = 0; jr < ops.num_derivatives(); ++jr)
    y.col(jr) = ops.d_mats[jr] * coeffs;
  return y;
}

Vector apply_gradient_norms(const FemOperators& ops, const Vector& coeffs) {
  return derivatives(ops, coeffs).rowwise().squaredNorm();
}

double xp_norm_p(const FemOperators& ops, const Vector& coeffs, double p) {
  if (!(p >= 1.0)) throw Error("xp_norm_p: p must be >= 1");
  const Vector sq = apply_gradient_norms(ops, coeffs);
  double sum = 0.0;
  for (Index i = 0; i < ops.m; ++i)
    sum += ops.weights[i] * std::pow(sq[i], 0.5 * p);
  return sum;
}

}  // namespace plap
