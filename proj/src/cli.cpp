#include "plap/cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "plap/experiments.hpp"

namespace plap {

namespace {

struct Options {
  std::string command;
  std::vector<long> ns;
  int k = 0;
  std::vector<double> ps;
  double eps = 1e-6;
  std::vector<std::string> cases;
  double t = 1.0;
  std::string out = "plap_out";
  std::string inner_norm = "frobenius";
  bool verbose = false;
  int jobs = 0;
  double scale = 1.0;
  double radius = 0.1;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + csv_number(x);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& x : v) out += (out.empty() ? "" : ",") + x;
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
}

// Resolved mesh sizes: one k per requested n, or the single --k.
std::vector<int> resolve_ks(const Options& o, int dim, long default_n) {
  if (o.k > 0) return {o.k};
  std::vector<long> ns = o.ns.empty() ? std::vector<long>{default_n} : o.ns;
  std::vector<int> ks;
  for (long n : ns) {
    try {
      ks.push_back(k_for_nodes(n, dim));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  return ks;
}

int single_k(const Options& o, int dim, long default_n) {
  const auto ks = resolve_ks(o, dim, default_n);
  if (ks.size() != 1)
    throw UsageError("--n takes a single value for '" + o.command + "'");
  return ks.front();
}

const Case& single_case(const Options& o, const std::string& fallback) {
  if (o.cases.size() > 1)
    throw UsageError("--case takes a single value for '" + o.command + "'");
  try {
    return find_case(o.cases.empty() ? fallback : o.cases.front());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::string manifest(const Options& o) {
  std::ostringstream m;
  m << "program=plap\n"
    << "version=" << kVersion << "\n"
    << "eigen=" << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
    << EIGEN_MINOR_VERSION << "\n"
    << "cli11=" << CLI11_VERSION << "\n"
    << "command=" << o.command << "\n"
    << "case=" << join(o.cases) << "\n"
    << "p=" << join_numbers(o.ps) << "\n";
  std::string ns;
  for (long n : o.ns) ns += (ns.empty() ? "" : ",") + std::to_string(n);
  m << "n=" << ns << "\n"
    << "k=" << o.k << "\n"
    << "eps=" << csv_number(o.eps) << "\n"
    << "t=" << csv_number(o.t) << "\n"
    << "inner_norm=" << o.inner_norm << "\n"
    << "scale=" << csv_number(o.scale) << "\n"
    << "radius=" << csv_number(o.radius) << "\n"
    << "jobs=" << o.jobs << "\n"
    << "out=" << o.out << "\n";
  return m.str();
}

class Runner {
 public:
  Runner(Options o, std::ostream& out, std::ostream& err)
      : o_(std::move(o)), out_(out), err_(err), dir_(o_.out) {
    cfg_.eps = o_.eps;
    if (o_.verbose)
      cfg_.observer = [this](const StepRecord& r) {
        const std::lock_guard lock(log_mutex_);
        err_ << format_step(r) << "\n";
      };
  }

  // Checks everything that does not need a solve and fills in the
  // per-command defaults so the manifest records the resolved values.
  void validate() {
    resolve_defaults();
    if (!(o_.eps > 0.0)) throw UsageError("--eps must be positive");
    if (!(o_.t > 0.0 && o_.t <= 1.0)) throw UsageError("--t must lie in (0,1]");
    if (!(o_.radius > 0.0)) throw UsageError("--radius must be positive");
    if (o_.scale == 0.0) throw UsageError("--scale must be nonzero");
    for (double p : o_.ps)
      if (!(p >= 2.0) || !std::isfinite(p))
        throw UsageError("--p values must be finite and at least 2");
    try {
      parse_inner_norm(o_.inner_norm);
      for (const auto& c : o_.cases) find_case(c);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (o_.command == "table") {
      for (const auto& c : table_cases()) resolve_ks(o_, find_case(c).dim, 2500);
    } else if (o_.command == "validate") {
      resolve_ks(o_, 2, 2500);
    } else if (o_.command == "solve") {
      single_k(o_, single_case(o_, "scalar-hat").dim, 2500);
    } else if (o_.command == "deform") {
      const Case& c = single_case(o_, "hat-normal");
      if (c.dim != 2 || c.d_prime != 2)
        throw UsageError("deform needs a 2D vector case");
      single_k(o_, 2, 2500);
    } else if (o_.command == "oned") {
      if (single_case(o_, "oned-const").dim != 1)
        throw UsageError("oned needs a 1D case (oned-const, oned-sign)");
      single_k(o_, 1, 201);
    } else if (o_.command == "inf") {
      if (single_case(o_, "hat-normal").dim != 2)
        throw UsageError("inf needs a 2D case");
      single_k(o_, 2, 2500);
    }
  }

  int run() {
    try {
      std::filesystem::create_directories(dir_);
      write_file(dir_ / "manifest.txt", manifest(o_));
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return exit_failure;
    }
    log("start " + o_.command);
    int code = exit_ok;
    try {
      if (o_.command == "validate") code = validate_cmd();
      if (o_.command == "solve") code = solve_cmd();
      if (o_.command == "table") code = table_cmd();
      if (o_.command == "deform") code = deform_cmd();
      if (o_.command == "oned") code = oned_cmd();
      if (o_.command == "inf") code = inf_cmd();
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      log(std::string("failed: ") + e.what());
      code = exit_failure;
    }
    log("done exit=" + std::to_string(code));
    write_file(dir_ / "run.log", log_);
    return code;
  }

 private:
  void resolve_defaults() {
    const std::string& c = o_.command;
    if (o_.cases.empty()) {
      if (c == "validate") o_.cases = {"manufactured"};
      if (c == "solve") o_.cases = {"scalar-hat"};
      if (c == "table") o_.cases = {"scalar-hat", "hat-normal", "hat-ones"};
      if (c == "deform" || c == "inf") o_.cases = {"hat-normal"};
      if (c == "oned") o_.cases = {"oned-const"};
    }
    if (o_.ps.empty()) {
      if (c == "table") o_.ps = {2, 3, 5, 8, 15, 25};
      else if (c == "deform") o_.ps = {2, 15};
      else if (c == "oned") o_.ps = {2, 5, 15, 25};
      else o_.ps = {2};
    }
    if (c == "validate" && o_.cases != std::vector<std::string>{"manufactured"})
      throw UsageError("validate runs the manufactured case only");
  }

  std::vector<std::string> table_cases() const {
    if (!o_.cases.empty()) return o_.cases;
    return {"scalar-hat", "hat-normal", "hat-ones"};
  }

  std::vector<double> ps_or(std::vector<double> fallback) const {
    return o_.ps.empty() ? fallback : o_.ps;
  }

  void log(const std::string& line) { log_ += timestamp() + " " + line + "\n"; }

  int validate_cmd() {
    std::string csv =
        "k,n,p,max_err_1,max_err_2,max_err_norm,component_asymmetry,"
        "newton_total,gap_bound\n";
    for (int k : resolve_ks(o_, 2, 2500))
      for (double p : ps_or({2.0})) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run_validation(k, p, cfg_, dir_);
        log("validate k=" + std::to_string(k) + " p=" + csv_number(p) +
            " seconds=" + seconds_since(t0));
        csv += std::to_string(k) + "," + std::to_string((k + 1) * (k + 1)) +
               "," + csv_number(p) + "," + csv_number(r.max_error[0]) + "," +
               csv_number(r.max_error[1]) + "," +
               csv_number(r.max_error_norm) + "," +
               csv_number(r.component_asymmetry) + "," +
               std::to_string(r.solve.newton_iters()) + "," +
               csv_number(r.solve.gap_bound) + "\n";
      }
    write_file(dir_ / "validation_summary.csv", csv);
    out_ << csv;
    return exit_ok;
  }

  int solve_cmd() {
    const Case& c = single_case(o_, "scalar-hat");
    const int k = single_k(o_, c.dim, c.dim == 1 ? 201 : 2500);
    const auto mesh = c.mesh(k);
    std::string csv =
        "case,p,n,newton_aux,newton_main,newton_total,restarts,R,t_final,"
        "gap_bound,objective\n";
    for (double p : ps_or({2.0})) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto prob = discretize(mesh, c.data(p, o_.scale));
      const auto r = solve(prob, cfg_);
      log("solve p=" + csv_number(p) + " seconds=" + seconds_since(t0));
      csv += c.name + "," + csv_number(p) + "," +
             std::to_string(mesh->num_nodes()) + "," +
             std::to_string(r.newton_iters_aux) + "," +
             std::to_string(r.newton_iters_main) + "," +
             std::to_string(r.newton_iters()) + "," +
             std::to_string(r.restarts) + "," + csv_number(r.R) + "," +
             csv_number(r.t_final) + "," + csv_number(r.gap_bound) + "," +
             csv_number(r.objective) + "\n";
      const std::string stem = "solve_" + c.name + "_p" + csv_number(p);
      const std::vector<VtkField> fields{
          point_field("u", r.u, prob.ops->d_prime)};
      export_vtk(*mesh, fields, dir_ / (stem + ".vtk"), stem);
    }
    write_file(dir_ / ("solve_" + c.name + ".csv"), csv);
    out_ << csv;
    return exit_ok;
  }

  int table_cmd() {
    TableSpec spec;
    spec.cases = table_cases();
    spec.ps = ps_or({2, 3, 5, 8, 15, 25});
    if (o_.k > 0)
      spec.ns = {static_cast<long>(o_.k + 1) * (o_.k + 1)};
    else
      spec.ns = o_.ns.empty() ? std::vector<long>{2500} : o_.ns;
    spec.cfg = cfg_;
    spec.jobs = o_.jobs;
    const auto cells = run_table(spec);
    bool all_ok = true;
    for (const auto& c : cells) {
      all_ok = all_ok && c.ok;
      log("cell case=" + c.case_name + " p=" + csv_number(c.p) +
          " n=" + std::to_string(c.n) + " status=" + (c.ok ? "ok" : "fail") +
          " seconds=" + csv_number(c.seconds));
      if (!c.ok)
        err_ << "cell " << c.case_name << " p=" << csv_number(c.p)
             << " n=" << c.n << " failed: " << c.error << "\n";
    }
    write_file(dir_ / "table.csv", table_csv(cells));
    const std::string wide = table_wide_csv(cells);
    write_file(dir_ / "table_wide.csv", wide);
    out_ << wide;
    return all_ok ? exit_ok : exit_failure;
  }

  int deform_cmd() {
    DeformationSpec spec;
    spec.case_name = single_case(o_, "hat-normal").name;
    spec.ps = ps_or({2.0, 15.0});
    spec.k = single_k(o_, 2, 2500);
    spec.t = o_.t;
    spec.near_radius = o_.radius;
    spec.cfg = cfg_;
    spec.out = dir_;
    const auto results = run_deformation(spec);
    for (const auto& r : results)
      if (r.inverted > 0)
        err_ << "warning: p=" << csv_number(r.p) << " inverts " << r.inverted
             << " elements\n";
    out_ << deformation_csv(results);
    return exit_ok;
  }

  int oned_cmd() {
    const Case& c = single_case(o_, "oned-const");
    const int k = single_k(o_, 1, 201);
    const auto results =
        oned_limit(c.name, o_.scale, ps_or({2, 5, 15, 25}), k, cfg_);
    write_file(dir_ / ("oned_" + c.name + ".csv"),
               oned_csv(c.name, o_.scale, k, results));
    std::string csv = "p,sup_distance,newton_total\n";
    for (const auto& r : results)
      csv += csv_number(r.p) + "," + csv_number(r.sup_distance) + "," +
             std::to_string(r.solve.newton_iters()) + "\n";
    write_file(dir_ / ("oned_" + c.name + "_summary.csv"), csv);
    out_ << csv;
    return exit_ok;
  }

  int inf_cmd() {
    err_ << "WARNING: experimental limit mode. The formulation is known not to\n"
            "reproduce the absolutely minimizing Lipschitz extension; outputs\n"
            "document that behaviour.\n";
    const Case& c = single_case(o_, "hat-normal");
    const auto r = run_inf(c.name, single_k(o_, 2, 2500),
                           parse_inner_norm(o_.inner_norm), cfg_, o_.t, dir_);
    out_ << "sigma=" << csv_number(r.sigma)
         << " max_norm=" << csv_number(r.max_norm)
         << " newton_total=" << r.solve.newton_iters();
    if (r.exact_error) out_ << " exact_error=" << csv_number(*r.exact_error);
    out_ << "\n";
    return exit_ok;
  }

  static std::string seconds_since(std::chrono::steady_clock::time_point t0) {
    return csv_number(std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count());
  }

  Options o_;
  std::ostream& out_;
  std::ostream& err_;
  std::filesystem::path dir_;
  SolverConfig cfg_;
  std::mutex log_mutex_;
  std::string log_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Options o;
  CLI::App app{"Interior-point solver for vector p-Laplace problems", "plap"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read key=value defaults from a file");
  app.add_option("--n", o.ns, "Node counts, comma separated or repeated")
      ->delimiter(',');
  app.add_option("--k", o.k, "Elements per side (overrides --n)")
      ->check(CLI::PositiveNumber);
  app.add_option("--p", o.ps, "Exponents, comma separated or repeated")
      ->delimiter(',');
  app.add_option("--eps", o.eps, "Target accuracy")->capture_default_str();
  app.add_option("--case", o.cases, "Named data set: " + known_case_names());
  app.add_option("--t", o.t, "Deformation step")->capture_default_str();
  app.add_option("--out", o.out, "Output directory")
      ->envname("PLAP_OUT_DIR")
      ->capture_default_str();
  app.add_option("--inner-norm", o.inner_norm, "frobenius or sup (inf mode)")
      ->capture_default_str();
  app.add_flag("--verbose,-v", o.verbose, "Log every Newton step to stderr");
  app.add_option("--jobs", o.jobs, "Parallel table cells (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--scale", o.scale, "Factor on f and h")->capture_default_str();
  app.add_option("--radius", o.radius,
                 "Radius around the free-boundary ends for quality reports")
      ->capture_default_str();

  const std::vector<std::pair<const char*, const char*>> commands{
      {"validate", "Manufactured-solution error study"},
      {"solve", "Solve one case for each --p"},
      {"table", "Newton iteration counts over cases, p and n"},
      {"deform", "Perturbation-of-identity mesh deformation"},
      {"oned", "1D solutions against the p -> infinity limit"},
      {"inf", "Experimental limit-mode solve"}};
  for (const auto& [name, help] : commands)
    app.add_subcommand(name, help)->fallthrough();
  app.require_subcommand(1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }
  o.command = app.get_subcommands().front()->get_name();

  Runner runner(o, out, err);
  try {
    runner.validate();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  }
  return runner.run();
}

}  // namespace plap
