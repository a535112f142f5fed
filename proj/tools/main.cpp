#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "mixedmop/brownian.hpp"
#include "mixedmop/io.hpp"
#include "mixedmop/kernel.hpp"
#include "mixedmop/mop.hpp"
#include "mixedmop/rh.hpp"

using namespace mixedmop;

namespace {

struct RunConfig {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::string> grid;
  std::uint64_t seed = 42;
  std::optional<double> tol;
  std::string precision = "double";
  int count = 10000;
  int bundles = 0;
  int resolution = 256;
};

using Artifacts = std::map<std::string, std::string>;

class VerificationFailed : public NumericalError {
 public:
  VerificationFailed(const std::string& what, json report)
      : NumericalError("verification_failed", what), report_(std::move(report)) {}
  const json& report() const { return report_; }

 private:
  json report_;
};

Precision precision_of(const RunConfig& rc) {
  return rc.precision == "extended" ? Precision::Extended : Precision::Double;
}

json options_json(const RunConfig& rc, const GridSpec* grid, double tol) {
  json o = {{"seed", rc.seed}, {"tol", tol}, {"precision", rc.precision}};
  if (grid) o["grid"] = {{"min", grid->min}, {"max", grid->max}, {"count", grid->count}};
  return o;
}

json header(const RunConfig& rc, json config, json options) {
  return {{"command", rc.command}, {"version", version()}, {"config", std::move(config)},
          {"options", std::move(options)}};
}

GridSpec grid_or(const RunConfig& rc, GridSpec fallback) {
  return rc.grid ? GridSpec::parse(*rc.grid) : fallback;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

MultiIndexPair balanced_pair(const MopConfig& c) {
  if (!c.n || !c.m) throw ValidationError("config needs multi-indices \"n\" and \"m\"");
  return MultiIndexPair::balanced(*c.n, *c.m);
}

json mop_resolved(const MopConfig& c, const ProductMomentTable& t) {
  json j = to_json(c);
  j["basis"] = {{"center", t.basis().center}, {"scale", t.basis().scale}};
  return j;
}

Artifacts mop_solve(const RunConfig& rc, const json& doc) {
  auto c = mop_config_from_json(doc);
  if (!c.n || !c.m) throw ValidationError("config needs multi-indices \"n\" and \"m\"");
  const auto pair = MultiIndexPair::mop(*c.n, *c.m);
  if (!c.normalization) c.normalization = Normalization::type_two(0);
  const auto table = build_moment_table(c.w1, c.w2, required_moment_order(*c.n, *c.m),
                                        {.basis = std::nullopt, .precision = precision_of(rc)});
  const auto report = check_normality(pair, table);
  const auto sol = solve_mixed(pair, table, *c.normalization);
  json out = header(rc, mop_resolved(c, table), options_json(rc, nullptr, 0.0));
  out["normality"] = to_json(report);
  out["solution"] = to_json(sol);
  return {{"solution.json", dump(out)}, {"moments.csv", moment_table_csv(table).str()}};
}

struct KernelSetup {
  MopConfig config;
  MultiIndexPair pair = MultiIndexPair::balanced({1}, {1});
  ProductMomentTable table;
  BiorthogonalSystem sys;
  CdKernelData cd;
};

KernelSetup kernel_setup(const RunConfig& rc, const json& doc) {
  auto c = mop_config_from_json(doc);
  const auto pair = balanced_pair(c);
  auto table = build_moment_table(c.w1, c.w2, kernel_moment_order(pair),
                                  {.basis = std::nullopt, .precision = precision_of(rc)});
  auto sys = build_biorthogonal(pair, table);
  auto cd = build_cd_data(pair, table);
  return {std::move(c), pair, std::move(table), std::move(sys), std::move(cd)};
}

double cd_value(const CdKernelData& cd, double x, double y) {
  try {
    return kernel_cd(cd, x, y);
  } catch (const DiagonalRegion&) {
    return kernel_cd_diagonal(cd, x);
  }
}

std::vector<double> subsample(const std::vector<double>& v, int k) {
  if (static_cast<int>(v.size()) <= k) return v;
  std::vector<double> out;
  for (int i = 0; i < k; ++i) out.push_back(v[(v.size() - 1) * i / (k - 1)]);
  return out;
}

Artifacts kernel_grid(const RunConfig& rc, const json& doc) {
  const auto s = kernel_setup(rc, doc);
  const auto grid = grid_or(rc, {-3, 3, 31});
  const double tol = rc.tol.value_or(1e-7);
  const auto pts = grid.points();
  CsvTable csv({"x", "y", "K_direct", "K_cd", "abs_diff"});
  double worst = 0.0;
  for (double x : pts)
    for (double y : pts) {
      const double kd = kernel_direct(s.sys, x, y);
      const double kc = cd_value(s.cd, x, y);
      const double diff = std::abs(kd - kc);
      worst = std::max(worst, diff / (1 + std::abs(kd)));
      csv.add_row({x, y, kd, kc, diff});
    }
  const auto trace = kernel_trace(s.sys);
  const auto sub = subsample(pts, 7);
  json out = header(rc, mop_resolved(s.config, s.table), options_json(rc, &grid, tol));
  out["trace"] = {{"value", trace.value}, {"error", trace.error}, {"expected", s.pair.n().total()}};
  out["idempotence_residual"] = idempotence_residual(s.sys, sub, sub);
  out["max_route_discrepancy"] = worst;
  out["inverse_residual"] = s.sys.inverse_residual();
  out["condition"] = s.sys.condition();
  out["passed"] = worst < tol;
  return {{"kernel_grid.csv", csv.str()}, {"kernel_report.json", dump(out)}};
}

Artifacts cd_check(const RunConfig& rc, const json& doc) {
  const auto s = kernel_setup(rc, doc);
  const auto grid = grid_or(rc, {-2, 2, 11});
  const double tol = rc.tol.value_or(1e-7);
  CsvTable csv({"x", "y", "K_direct", "K_cd", "K_rh"});
  double d_cd = 0.0, d_rh = 0.0;
  for (double x : grid.points())
    for (double y : grid.points()) {
      const double kd = kernel_direct(s.sys, x, y);
      const double kc = cd_value(s.cd, x, y);
      double kr = std::nan("");
      try {
        kr = kernel_rh(s.cd, x, y).value;
        d_rh = std::max(d_rh, std::abs(kr - kd) / (1 + std::abs(kd)));
      } catch (const DiagonalRegion&) {
      }
      d_cd = std::max(d_cd, std::abs(kc - kd) / (1 + std::abs(kd)));
      csv.add_row({x, y, kd, kc, kr});
    }
  json out = header(rc, mop_resolved(s.config, s.table), options_json(rc, &grid, tol));
  out["solve_count"] = s.cd.solve_count();
  out["max_solve_residual"] = s.cd.max_residual();
  out["max_direct_cd"] = d_cd;
  out["max_direct_rh"] = d_rh;
  out["passed"] = d_cd < tol && d_rh < tol;
  if (!out["passed"].get<bool>()) throw VerificationFailed("kernel routes disagree beyond tolerance", out);
  return {{"cd_check.csv", csv.str()}, {"cd_check.json", dump(out)}};
}

Artifacts rh_verify_cmd(const RunConfig& rc, const json& doc) {
  auto c = mop_config_from_json(doc);
  const auto pair = balanced_pair(c);
  const auto table = build_moment_table(c.w1, c.w2, kernel_moment_order(pair),
                                        {.basis = std::nullopt, .precision = precision_of(rc)});
  const auto normality = check_normality(pair, table);
  if (!normality.normal()) throw DegeneratePair("pair is not normal: " + normality.summary(), normality);
  const auto cd = build_cd_data(pair, table);
  const double tol = rc.tol.value_or(1e-7);
  RhVerifyOptions o;
  o.seed = rc.seed;
  const auto rep = rh_verify(cd, o);
  CsvTable csv({"point", "z_re", "z_im", "matrix", "row", "col", "re", "im"});
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const auto z = rep.points[i];
    const auto Y = eval_Y(cd, z);
    const auto X = eval_X(cd, z);
    for (int which = 0; which < 2; ++which) {
      const auto& M = which == 0 ? Y.matrix : X.matrix;
      for (int r = 0; r < M.rows(); ++r)
        for (int k = 0; k < M.cols(); ++k)
          csv.add_row({double(i), z.real(), z.imag(), double(which), double(r), double(k),
                       M(r, k).real(), M(r, k).imag()});
    }
  }
  json out = header(rc, mop_resolved(c, table), options_json(rc, nullptr, tol));
  out["normality"] = to_json(normality);
  out["report"] = to_json(rep);
  const bool passed = rep.max_det() < tol && rep.max_xy() < tol && rep.max_jump() < 1e-6 &&
                      rep.asymptotics_y.passed && rep.asymptotics_x.passed;
  out["passed"] = passed;
  if (!passed) throw VerificationFailed("RH conditions not met within tolerance", out);
  return {{"rh_report.json", dump(out)}, {"rh_matrices.csv", csv.str()}};
}

GridSpec brownian_grid(const RunConfig& rc, const BrownianConfig& c) {
  if (rc.grid) return GridSpec::parse(*rc.grid);
  double lo = 1e300, hi = -1e300;
  for (const auto& a : c.starts)
    for (const auto& b : c.ends) {
      const double mean = (1 - c.t) * a.point + c.t * b.point;
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
    }
  const double sd = std::sqrt(c.t * (1 - c.t) / c.scale());
  return {lo - 5 * sd, hi + 5 * sd, 101};
}

Artifacts brownian_kernel(const RunConfig& rc, const json& doc) {
  const auto c = brownian_config_from_json(doc);
  const auto K = correlation_kernel(c, precision_of(rc));
  const auto grid = brownian_grid(rc, c);
  CsvTable csv({"x", "y", "K"});
  for (double x : grid.points())
    for (double y : grid.points()) csv.add_row({x, y, K(x, y)});
  const auto trace = kernel_trace(K.system());
  json out = header(rc, to_json(c), options_json(rc, &grid, 0.0));
  out["paths"] = c.paths();
  out["trace"] = {{"value", trace.value}, {"error", trace.error}};
  out["inverse_residual"] = K.system().inverse_residual();
  return {{"kernel_grid.csv", csv.str()}, {"kernel_report.json", dump(out)}};
}

Artifacts brownian_density(const RunConfig& rc, const json& doc) {
  const auto c = brownian_config_from_json(doc);
  const auto K = correlation_kernel(c, precision_of(rc));
  const auto grid = brownian_grid(rc, c);
  CsvTable csv({"x", "r1"});
  for (double x : grid.points()) csv.add_row({x, K(x, x)});
  const auto trace = kernel_trace(K.system());
  json out = header(rc, to_json(c), options_json(rc, &grid, 0.0));
  out["paths"] = c.paths();
  out["integral_r1"] = {{"value", trace.value}, {"error", trace.error}};
  if (c.distinct_points() && c.paths() <= 4) {
    const auto z = km_normalization(c);
    out["partition_function"] = {{"value", z.value},
                                 {"error_bound", z.error_bound},
                                 {"closed_form", z.andreief},
                                 {"nodes_per_axis", z.nodes_per_axis}};
  } else {
    out["partition_function"] = nullptr;
  }
  return {{"density_grid.csv", csv.str()}, {"density_report.json", dump(out)}};
}

Artifacts brownian_sample(const RunConfig& rc, const json& doc) {
  const auto c = brownian_config_from_json(doc);
  if (rc.count < 1) throw ValidationError("--count must be positive");
  if (rc.bundles < 0) throw ValidationError("--bundles must be nonnegative");
  const KarlinMcGregorDensity density(c);
  const auto K = correlation_kernel(c, precision_of(rc));
  const auto grid = brownian_grid(rc, c);
  const auto s = sample_positions(density, rc.count, rc.seed);
  const int n = c.paths();

  std::vector<std::string> cols{"draw"};
  for (int i = 1; i <= n; ++i) cols.push_back("x" + std::to_string(i));
  CsvTable samples(cols);
  for (std::size_t d = 0; d < s.draws.size(); ++d) {
    std::vector<double> row{double(d)};
    for (int i = 0; i < n; ++i) row.push_back(s.draws[d](i));
    samples.add_row(row);
  }
  const int bins = std::min(40, std::max(2, grid.count - 1));
  const auto h = position_histogram_test(s.draws, K, bins, grid.min, grid.max);

  json out = header(rc, to_json(c), options_json(rc, &grid, 0.0));
  out["draws"] = s.draws.size();
  out["chains"] = s.chains;
  out["acceptance"] = s.acceptance;
  out["proposal_scale"] = s.proposal_scale;
  out["r_hat"] = s.r_hat;
  out["converged"] = s.converged;
  out["histogram"] = {{"edges", h.edges},
                      {"observed", h.observed},
                      {"expected", h.expected},
                      {"chi2", h.chi2.statistic},
                      {"dof", h.chi2.dof},
                      {"p_value", h.chi2.p_value}};
  Artifacts a{{"samples.csv", samples.str()}};
  if (rc.bundles > 0) {
    const auto p = sample_paths(c, rc.resolution, rc.bundles, stream_seed(rc.seed, 1000));
    CsvTable paths({"bundle", "time", "path_index", "position"});
    for (std::size_t b = 0; b < p.bundles.size(); ++b)
      for (int j = 0; j < p.bundles[b].rows(); ++j)
        for (std::size_t k = 0; k < p.times.size(); ++k)
          paths.add_row({double(b), p.times[k], double(j + 1), p.bundles[b](j, k)});
    out["path_bundles"] = {{"count", p.bundles.size()},
                           {"resolution", rc.resolution},
                           {"attempts", p.attempts},
                           {"acceptance_rate", p.acceptance_rate}};
    a["paths.csv"] = paths.str();
  }
  a["sample_report.json"] = dump(out);
  return a;
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

void write_artifacts(const std::string& dir, const Artifacts& a) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : a) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + name);
    f << text;
  }
}

int fail(const RunConfig& rc, const json& doc, int status, const std::string& code,
         const std::string& message, const json& extra) {
  std::cerr << "error " << code << ": " << one_line(message) << "\n";
  json report = {{"command", rc.command}, {"version", version()}, {"exit_status", status},
                 {"code", code},          {"message", message},   {"config", doc}};
  for (auto it = extra.begin(); it != extra.end(); ++it) report[it.key()] = it.value();
  try {
    write_artifacts(rc.out_dir, {{"error.json", dump(report)}});
  } catch (const std::exception& e) {
    std::cerr << "error io_error: " << one_line(e.what()) << "\n";
  }
  return status;
}

int run(const RunConfig& rc) {
  json doc;
  try {
    doc = read_json_file(rc.config_path);
    Artifacts a;
    if (rc.command == "mop-solve") a = mop_solve(rc, doc);
    else if (rc.command == "kernel-grid") a = kernel_grid(rc, doc);
    else if (rc.command == "cd-check") a = cd_check(rc, doc);
    else if (rc.command == "rh-verify") a = rh_verify_cmd(rc, doc);
    else if (rc.command == "brownian-kernel") a = brownian_kernel(rc, doc);
    else if (rc.command == "brownian-density") a = brownian_density(rc, doc);
    else if (rc.command == "brownian-sample") a = brownian_sample(rc, doc);
    else throw ValidationError("unknown command " + rc.command);
    write_artifacts(rc.out_dir, a);
    return 0;
  } catch (const ValidationError& e) {
    return fail(rc, doc, 1, e.code(), e.what(), json::object());
  } catch (const NotNormalizable& e) {
    return fail(rc, doc, 2, e.code(), e.what(), {{"normality", to_json(e.report())}});
  } catch (const DegeneratePair& e) {
    return fail(rc, doc, 2, e.code(), e.what(), {{"normality", to_json(e.report())}});
  } catch (const VerificationFailed& e) {
    return fail(rc, doc, 2, e.code(), e.what(), {{"report", e.report()}});
  } catch (const AccuracyFailure& e) {
    return fail(rc, doc, 2, e.code(), e.what(), {{"achieved_bound", e.achieved_bound()}});
  } catch (const NumericalError& e) {
    return fail(rc, doc, 2, e.code(), e.what(), json::object());
  } catch (const std::exception& e) {
    return fail(rc, doc, 3, "internal_error", e.what(), json::object());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-type multiple orthogonal polynomials and non-intersecting Brownian motions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));
  RunConfig rc;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"mop-solve", "Solve for mixed-type multiple orthogonal polynomials"},
      {"kernel-grid", "Kernel on a grid by the biorthogonal and Christoffel-Darboux routes"},
      {"cd-check", "Compare the three kernel routes on a grid"},
      {"rh-verify", "Verify the Riemann-Hilbert conditions of Y and X"},
      {"brownian-kernel", "Correlation kernel of non-intersecting Brownian motions"},
      {"brownian-density", "One-point density r1 and partition function"},
      {"brownian-sample", "Sample positions (and optionally path bundles)"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", rc.config_path, "JSON configuration")->required();
    sub->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--grid", rc.grid, "Grid min:max:count");
    sub->add_option("--seed", rc.seed, "Master seed")->capture_default_str();
    sub->add_option("--tol", rc.tol, "Tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--precision", rc.precision, "double or extended")
        ->check(CLI::IsMember({"double", "extended"}))
        ->capture_default_str();
    if (name == "brownian-sample") {
      sub->add_option("--count", rc.count, "Number of position draws")->capture_default_str();
      sub->add_option("--bundles", rc.bundles, "Number of path bundles")->capture_default_str();
      sub->add_option("--resolution", rc.resolution, "Time steps per bundle")->capture_default_str();
    }
    sub->callback([&rc, name = name] { rc.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error usage_error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return run(rc);
}
