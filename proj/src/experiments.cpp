#include "plap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

namespace plap {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error("write failed: " + path.string());
}

std::string p_tag(double p) { return csv_number(p); }

double max_norm_of(const Vector& v, int dp) {
  double best = 0.0;
  for (Index k = 0; k < v.size() / dp; ++k)
    best = std::max(best, v.segment(k * dp, dp).norm());
  return best;
}

// Element owning each Neumann facet, in facet order.
std::vector<std::pair<Index, BoundaryFacet>> neumann_owners(const Mesh& mesh) {
  std::map<std::pair<Index, Index>, Index> owner;
  const int npe = mesh.nodes_per_element();
  for (Index i = 0; i < mesh.num_elements(); ++i) {
    const auto e = mesh.element(i);
    for (int a = 0; a < npe; ++a)
      for (int b = a + 1; b < npe; ++b)
        owner[{std::min(e[a], e[b]), std::max(e[a], e[b])}] = i;
  }
  std::vector<std::pair<Index, BoundaryFacet>> out;
  for (const auto& f : mesh.boundary) {
    if (f.marker != BoundaryMarker::neumann) continue;
    const auto it =
        owner.find({std::min(f.nodes[0], f.nodes[1]),
                    std::max(f.nodes[0], f.nodes[1])});
    if (it != owner.end()) out.emplace_back(it->second, f);
  }
  return out;
}

}  // namespace

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

VtkField point_field(const std::string& name, const Vector& coeffs,
                     int d_prime) {
  VtkField f;
  f.name = name;
  f.location = FieldLocation::point;
  f.components = d_prime;
  f.values.assign(coeffs.data(), coeffs.data() + coeffs.size());
  return f;
}

// ---------------------------------------------------------------------------

ValidationReport run_validation(
    int k, double p, const SolverConfig& cfg,
    const std::optional<std::filesystem::path>& out) {
  if (!(p >= 2.0)) throw Error("validation: p must be at least 2");
  const Case& c = find_case("manufactured");
  const auto mesh = c.mesh(k);
  const DiscreteProblem prob = discretize(mesh, c.data(p, 1.0));
  ValidationReport rep;
  rep.k = k;
  rep.p = p;
  rep.solve = solve(prob, cfg);
  const Vector exact = interpolate(*prob.ops, *c.exact);
  rep.error = rep.solve.u - exact;
  const int dp = prob.ops->d_prime;
  rep.max_error.assign(dp, 0.0);
  for (Index a = 0; a < mesh->num_nodes(); ++a) {
    const auto e = rep.error.segment(a * dp, dp);
    for (int r = 0; r < dp; ++r)
      rep.max_error[r] = std::max(rep.max_error[r], std::abs(e[r]));
    rep.max_error_norm = std::max(rep.max_error_norm, e.norm());
    if (dp == 2)
      rep.component_asymmetry =
          std::max(rep.component_asymmetry, std::abs(e[0] - e[1]));
  }

  if (out) {
    const std::string stem =
        "validation_k" + std::to_string(k) + "_p" + p_tag(p);
    std::string csv = "node,x,y,err_1,err_2\n";
    for (Index a = 0; a < mesh->num_nodes(); ++a) {
      const auto& x = mesh->nodes[a];
      csv += std::to_string(a) + "," + csv_number(x[0]) + "," +
             csv_number(x[1]) + "," + csv_number(rep.error[a * dp]) + "," +
             csv_number(rep.error[a * dp + 1]) + "\n";
    }
    write_text(*out / (stem + ".csv"), csv);
    const std::vector<VtkField> fields{point_field("solution", rep.solve.u, dp),
                                       point_field("exact", exact, dp),
                                       point_field("error", rep.error, dp)};
    export_vtk(*mesh, fields, *out / (stem + ".vtk"), stem);
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<TableCell> run_table(const TableSpec& spec) {
  struct Job {
    const Case* c;
    double p;
    long n;
  };
  std::vector<Job> jobs;
  for (const auto& name : spec.cases) {
    const Case& c = find_case(name);
    for (long n : spec.ns) {
      k_for_nodes(n, c.dim);  // reject before any compute
      for (double p : spec.ps) jobs.push_back({&c, p, n});
    }
  }
  std::vector<TableCell> cells(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      const Job& job = jobs[i];
      TableCell& cell = cells[i];
      cell.case_name = job.c->name;
      cell.p = job.p;
      cell.n = job.n;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto mesh = job.c->mesh(k_for_nodes(job.n, job.c->dim));
        const auto rep = solve(discretize(mesh, job.c->data(job.p, 1.0)), spec.cfg);
        cell.ok = true;
        cell.newton_aux = rep.newton_iters_aux;
        cell.newton_main = rep.newton_iters_main;
        cell.gap_bound = rep.gap_bound;
        cell.objective = rep.objective;
        cell.restarts = rep.restarts;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      cell.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    }
  };
  int workers = spec.jobs > 0 ? spec.jobs
                              : static_cast<int>(std::max(
                                    1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return cells;
}

std::string table_csv(const std::vector<TableCell>& cells) {
  std::string out =
      "case,p,n,status,newton_aux,newton_main,newton_total,restarts,"
      "gap_bound,objective,error\n";
  for (const auto& c : cells) {
    out += csv_field(c.case_name) + "," + csv_number(c.p) + "," +
           std::to_string(c.n) + "," + (c.ok ? "ok" : "fail") + ",";
    if (c.ok) {
      out += std::to_string(c.newton_aux) + "," +
             std::to_string(c.newton_main) + "," +
             std::to_string(c.newton_total()) + "," +
             std::to_string(c.restarts) + "," + csv_number(c.gap_bound) +
             "," + csv_number(c.objective) + ",";
    } else {
      out += ",,,,,,";
    }
    out += csv_field(c.error) + "\n";
  }
  return out;
}

std::string table_wide_csv(const std::vector<TableCell>& cells) {
  std::vector<std::pair<std::string, long>> columns;
  std::vector<double> ps;
  for (const auto& c : cells) {
    if (std::find(columns.begin(), columns.end(),
                  std::pair{c.case_name, c.n}) == columns.end())
      columns.emplace_back(c.case_name, c.n);
    if (std::find(ps.begin(), ps.end(), c.p) == ps.end()) ps.push_back(c.p);
  }
  std::string out = "p";
  for (const auto& [name, n] : columns)
    out += "," + csv_field(name + " n=" + std::to_string(n));
  out += "\n";
  for (double p : ps) {
    out += csv_number(p);
    for (const auto& [name, n] : columns) {
      out += ",";
      for (const auto& c : cells)
        if (c.case_name == name && c.n == n && c.p == p)
          out += c.ok ? std::to_string(c.newton_total()) : "fail";
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Index> elements_near_free_ends(const Mesh& mesh, double radius) {
  auto a = elements_near(mesh, {0.0, 0.0}, radius);
  const auto b = elements_near(mesh, {1.0, 1.0}, radius);
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

Mesh deform(const Mesh& mesh, const Vector& v, double t) {
  if (v.size() != 2 * mesh.num_nodes())
    throw Error("deform: expected a 2-component nodal field");
  std::vector<Point> disp(mesh.num_nodes());
  for (Index k = 0; k < mesh.num_nodes(); ++k)
    disp[k] = {t * v[2 * k], t * v[2 * k + 1]};
  return displaced(mesh, disp);
}

std::vector<DeformationResult> run_deformation(const DeformationSpec& spec) {
  if (!(spec.t > 0.0 && spec.t <= 1.0))
    throw Error("deformation: t must lie in (0,1]");
  const Case& c = find_case(spec.case_name);
  if (c.dim != 2 || c.d_prime != 2)
    throw Error("deformation: case '" + c.name + "' is not a 2D vector case");
  const auto mesh = c.mesh(spec.k);
  const auto near = elements_near_free_ends(*mesh, spec.near_radius);
  std::vector<DeformationResult> results;
  for (double p : spec.ps) {
    DeformationResult r;
    r.p = p;
    r.t = spec.t;
    r.solve = solve(discretize(mesh, c.data(p, 1.0)), spec.cfg);
    r.max_displacement = max_norm_of(r.solve.u, 2);
    r.deformed = std::make_shared<const Mesh>(deform(*mesh, r.solve.u, spec.t));
    r.before = quality(*mesh);
    r.after = quality(*r.deformed);
    r.near_before = quality(*mesh, near);
    r.near_after = quality(*r.deformed, near);
    for (Index i = 0; i < r.deformed->num_elements(); ++i)
      if (!(r.deformed->signed_measure(i) > 0.0)) ++r.inverted;
    if (spec.out) {
      const std::string stem = "deform_" + c.name + "_p" + p_tag(p);
      const std::vector<VtkField> fields{point_field("v", r.solve.u, 2)};
      export_vtk(*mesh, fields, *spec.out / (stem + "_before.vtk"), stem);
      export_vtk(*r.deformed, fields, *spec.out / (stem + "_after.vtk"), stem);
    }
    results.push_back(std::move(r));
  }
  if (spec.out)
    write_text(*spec.out / ("deform_" + c.name + ".csv"),
               deformation_csv(results));
  return results;
}

std::string deformation_csv(const std::vector<DeformationResult>& results) {
  std::string out =
      "p,t,max_displacement,inverted,min_angle_before,min_angle_after,"
      "max_aspect_before,max_aspect_after,near_min_angle_before,"
      "near_min_angle_after,newton_total\n";
  for (const auto& r : results)
    out += csv_number(r.p) + "," + csv_number(r.t) + "," +
           csv_number(r.max_displacement) + "," + std::to_string(r.inverted) +
           "," + csv_number(r.before.min_angle) + "," +
           csv_number(r.after.min_angle) + "," +
           csv_number(r.before.max_aspect_ratio) + "," +
           csv_number(r.after.max_aspect_ratio) + "," +
           csv_number(r.near_before.min_angle) + "," +
           csv_number(r.near_after.min_angle) + "," +
           std::to_string(r.solve.newton_iters()) + "\n";
  return out;
}

// ---------------------------------------------------------------------------

double tent(double x, double scale) {
  const double d = std::min(x, 1.0 - x);
  return scale < 0.0 ? -d : d;
}

std::vector<OnedResult> oned_limit(const std::string& case_name, double scale,
                                   const std::vector<double>& ps, int k,
                                   const SolverConfig& cfg) {
  const Case& c = find_case(case_name);
  if (c.dim != 1) throw Error("oned: case '" + c.name + "' is not 1D");
  if (scale == 0.0) throw Error("oned: scale must be nonzero");
  const bool oracle = c.name == "oned-const";
  const auto mesh = c.mesh(k);
  std::vector<OnedResult> out;
  for (double p : ps) {
    OnedResult r;
    r.p = p;
    r.solve = solve(discretize(mesh, c.data(p, scale)), cfg);
    r.u = r.solve.u;
    r.sup_distance = std::numeric_limits<double>::quiet_NaN();
    if (oracle) {
      r.sup_distance = 0.0;
      for (Index a = 0; a < mesh->num_nodes(); ++a)
        r.sup_distance = std::max(
            r.sup_distance, std::abs(r.u[a] - tent(mesh->nodes[a][0], scale)));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string oned_csv(const std::string& case_name, double scale, int k,
                     const std::vector<OnedResult>& results) {
  const bool oracle = case_name == "oned-const";
  std::string out = "x";
  for (const auto& r : results) out += ",u_p" + csv_number(r.p);
  if (oracle) out += ",limit";
  out += "\n";
  for (int a = 0; a <= k; ++a) {
    const double x = static_cast<double>(a) / k;
    out += csv_number(x);
    for (const auto& r : results) out += "," + csv_number(r.u[a]);
    if (oracle) out += "," + csv_number(tent(x, scale));
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

InfResult run_inf(const std::string& case_name, int k, InnerNorm norm,
                  const SolverConfig& cfg, double t,
                  const std::optional<std::filesystem::path>& out) {
  const Case& c = find_case(case_name);
  const auto mesh = c.mesh(k);
  const DiscreteProblem base = discretize(mesh, c.data(2.0, 1.0));
  const InfProblem prob = make_inf_problem(base, norm);
  const FemOperators& ops = *prob.ops;
  const int dp = ops.d_prime;

  InfResult r;
  r.solve = solve_inf(prob, cfg);
  r.sigma = r.solve.s[0];
  const Vector norms = element_norms(ops, r.solve.u, norm);
  r.max_norm = norms.maxCoeff();
  if (c.exact) {
    const Vector exact = interpolate(ops, *c.exact);
    r.exact_error = (r.solve.u - exact).cwiseAbs().maxCoeff();
  }
  r.boundary_min_norm = std::numeric_limits<double>::infinity();
  r.boundary_slope_min = std::numeric_limits<double>::infinity();
  r.boundary_slope_max = 0.0;
  for (const auto& [elem, f] : neumann_owners(*mesh)) {
    ++r.boundary_elements;
    r.boundary_min_norm = std::min(r.boundary_min_norm, norms[elem]);
    const auto& a = mesh->nodes[f.nodes[0]];
    const auto& b = mesh->nodes[f.nodes[1]];
    const double len = std::hypot(a[0] - b[0], a[1] - b[1]);
    double slope = 0.0;
    for (int q = 0; q < dp; ++q)
      slope = std::max(slope, std::abs(r.solve.u[f.nodes[1] * dp + q] -
                                       r.solve.u[f.nodes[0] * dp + q]) /
                                  len);
    r.boundary_slope_min = std::min(r.boundary_slope_min, slope);
    r.boundary_slope_max = std::max(r.boundary_slope_max, slope);
  }
  if (r.boundary_elements == 0) {
    r.boundary_min_norm = 0.0;
    r.boundary_slope_min = 0.0;
  }
  if (dp == 2 && mesh->dim == 2)
    r.deformed = std::make_shared<const Mesh>(deform(*mesh, r.solve.u, t));

  if (out) {
    const std::string stem =
        std::string("inf_") + c.name + "_" + to_string(norm);
    std::vector<VtkField> fields{point_field("v", r.solve.u, dp)};
    VtkField cell;
    cell.name = "inner_norm";
    cell.location = FieldLocation::cell;
    cell.values.assign(norms.data(), norms.data() + norms.size());
    fields.push_back(cell);
    export_vtk(*mesh, fields, *out / (stem + ".vtk"), stem);
    if (r.deformed)
      export_vtk(*r.deformed, fields, *out / (stem + "_after.vtk"), stem);
    std::string csv = "key,value\n";
    csv += "case," + csv_field(c.name) + "\n";
    csv += std::string("inner_norm,") + to_string(norm) + "\n";
    csv += "k," + std::to_string(k) + "\n";
    csv += "sigma," + csv_number(r.sigma) + "\n";
    csv += "max_norm," + csv_number(r.max_norm) + "\n";
    csv += "objective," + csv_number(r.solve.objective) + "\n";
    csv += "newton_total," + std::to_string(r.solve.newton_iters()) + "\n";
    csv += "gap_bound," + csv_number(r.solve.gap_bound) + "\n";
    csv += "boundary_elements," + std::to_string(r.boundary_elements) + "\n";
    csv += "boundary_min_norm," + csv_number(r.boundary_min_norm) + "\n";
    csv += "boundary_slope_min," + csv_number(r.boundary_slope_min) + "\n";
    csv += "boundary_slope_max," + csv_number(r.boundary_slope_max) + "\n";
    if (r.exact_error)
      csv += "exact_error," + csv_number(*r.exact_error) + "\n";
    write_text(*out / (stem + ".csv"), csv);
  }
  return r;
}

}  // namespace plap
