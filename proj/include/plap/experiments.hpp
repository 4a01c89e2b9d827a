#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plap/cases.hpp"
#include "plap/inflimit.hpp"
#include "plap/solver.hpp"

namespace plap {

/// RFC-4180 field quoting (only when needed) and a fixed number format.
std::string csv_field(const std::string& text);
std::string csv_number(double value);

/// Nodewise field as VTK point data (vector fields padded to 3 components).
VtkField point_field(const std::string& name, const Vector& coeffs,
                     int d_prime);

// ---------------------------------------------------------------------------

struct ValidationReport {
  int k = 0;
  double p = 2.0;
  /// Per-component max nodal error |v - v*|.
  std::vector<double> max_error;
  /// max over nodes of the Euclidean error.
  double max_error_norm = 0.0;
  /// max over nodes of |err_1 - err_2|.
  double component_asymmetry = 0.0;
  /// Full nodal error v - v*.
  Vector error;
  SolveReport solve;
};

/// Manufactured case on unit_square(k). With `out`, writes
/// validation_k<k>_p<p>.csv (per-node errors) and .vtk.
ValidationReport run_validation(int k, double p, const SolverConfig& cfg,
                                const std::optional<std::filesystem::path>&
                                    out = std::nullopt);

// ---------------------------------------------------------------------------

struct TableCell {
  std::string case_name;
  double p = 2.0;
  long n = 0;
  bool ok = false;
  int newton_aux = 0;
  int newton_main = 0;
  double gap_bound = 0.0;
  double objective = 0.0;
  int restarts = 0;
  double seconds = 0.0;  // wall time; excluded from the CSV output
  std::string error;

  int newton_total() const { return newton_aux + newton_main; }
};

struct TableSpec {
  std::vector<std::string> cases;
  std::vector<double> ps;
  std::vector<long> ns;
  SolverConfig cfg;
  /// Worker threads; 0 selects the hardware concurrency.
  int jobs = 1;
};

/// Solves every (case, p, n) cell. Failures are recorded per cell. The
/// result order is case-major, then n, then p, independent of scheduling.
std::vector<TableCell> run_table(const TableSpec& spec);

/// One row per cell: case,p,n,status,newton_aux,newton_main,newton_total,
/// restarts,gap_bound,objective,error.
std::string table_csv(const std::vector<TableCell>& cells);

/// Rows p, one column per (case, n) holding the total Newton count or
/// "fail".
std::string table_wide_csv(const std::vector<TableCell>& cells);

// ---------------------------------------------------------------------------

/// Ends of the free boundary of the 2D cases: (0,0) and (1,1).
std::vector<Index> elements_near_free_ends(const Mesh& mesh, double radius);

struct DeformationResult {
  double p = 2.0;
  double t = 1.0;
  SolveReport solve;
  double max_displacement = 0.0;  // max_k |v(x_k)|
  QualityReport before, after;
  /// Restricted to elements near the free-boundary ends.
  QualityReport near_before, near_after;
  /// Elements with non-positive area after deformation.
  Index inverted = 0;
  std::shared_ptr<const Mesh> deformed;
};

struct DeformationSpec {
  std::string case_name = "hat-normal";
  std::vector<double> ps{2.0};
  int k = 49;
  double t = 1.0;
  double near_radius = 0.1;
  SolverConfig cfg;
  std::optional<std::filesystem::path> out;
};

/// x -> x + t v(x) with v = u + g. Requires a vector case (d' = 2).
Mesh deform(const Mesh& mesh, const Vector& v, double t);

/// Solves the case per p and deforms the mesh. With `out`, writes
/// deform_<case>_p<p>_{before,after}.vtk and deform_<case>.csv.
std::vector<DeformationResult> run_deformation(const DeformationSpec& spec);

/// Quality summary CSV for run_deformation results.
std::string deformation_csv(const std::vector<DeformationResult>& results);

// ---------------------------------------------------------------------------

/// sign(scale) * dist(x, {0,1})
double tent(double x, double scale = 1.0);

struct OnedResult {
  double p = 2.0;
  Vector u;                // nodal values on unit_interval(k)
  /// sup_k |u_k - tent(x_k)|; NaN without an oracle (sign-changing f).
  double sup_distance = 0.0;
  SolveReport solve;
};

/// 1D case ("oned-const" or "oned-sign") for each p on k segments.
std::vector<OnedResult> oned_limit(const std::string& case_name, double scale,
                                   const std::vector<double>& ps, int k,
                                   const SolverConfig& cfg);

/// Columns x, then u for every p, then the limit when it is known.
std::string oned_csv(const std::string& case_name, double scale, int k,
                     const std::vector<OnedResult>& results);

// ---------------------------------------------------------------------------

struct InfResult {
  SolveReport solve;
  double sigma = 0.0;
  /// max_i of the inner norm of D(u+g).
  double max_norm = 0.0;
  /// Max nodal error to the exact field, when the case has one.
  std::optional<double> exact_error;
  /// Elements owning a Neumann facet and the minimum of their inner norm.
  Index boundary_elements = 0;
  double boundary_min_norm = 0.0;
  /// max_r |u_r(b) - u_r(a)| / |b - a| over Neumann edges, min and max.
  double boundary_slope_min = 0.0;
  double boundary_slope_max = 0.0;
  std::shared_ptr<const Mesh> deformed;  // d' = 2 cases only
};

/// Limit-mode solve of a named case on unit_square(k).
InfResult run_inf(const std::string& case_name, int k, InnerNorm norm,
                  const SolverConfig& cfg, double t = 1.0,
                  const std::optional<std::filesystem::path>& out =
                      std::nullopt);

}  // namespace plap
