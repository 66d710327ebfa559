#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "knet/analysis.hpp"
#include "knet/catalog.hpp"
#include "knet/config.hpp"
#include "knet/errors.hpp"
#include "knet/io.hpp"
#include "knet/oracle.hpp"
#include "knet/parallel.hpp"
#include "knet/solver.hpp"

using namespace knet;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.3.0";

struct Flags {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::size_t> nodes_per_edge;
  std::optional<double> h;
  std::optional<double> epsilon;
  std::optional<std::string> junction_mode;
  std::optional<std::string> boundary_mode;
  std::optional<std::string> lf_theta;
  std::optional<std::string> flux;
  std::optional<double> tol;
  std::optional<std::size_t> max_sweeps;
  std::optional<std::string> method;
  std::optional<std::string> schedule;
  std::vector<double> resolutions;
  bool deterministic = false;
};

void add_run_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "run configuration JSON")->required();
  app->add_option("--out-dir", f.out_dir, "directory for artifacts");
  app->add_option("--nodes-per-edge", f.nodes_per_edge, "nodes on every edge, endpoints included");
  app->add_option("--spacing", f.h, "target spacing (used when --nodes-per-edge is absent)");
  app->add_option("--epsilon", f.epsilon, "added viscosity");
  app->add_option("--junction-mode", f.junction_mode, "kirchhoff or minmax");
  app->add_option("--boundary-mode", f.boundary_mode, "auto, strong or relaxed");
  app->add_option("--lf-theta", f.lf_theta, "auto or a number");
  app->add_option("--flux", f.flux, "one_sided or corrected");
  app->add_option("--tol", f.tol, "sup-norm residual tolerance");
  app->add_option("--max-sweeps", f.max_sweeps, "sweep budget");
  app->add_option("--method", f.method, "sweep, newton or hybrid");
  app->add_option("--epsilon-schedule", f.schedule, "g:start:ratio:count");
  app->add_flag("--deterministic", f.deterministic, "single worker, fixed sweep order");
}

RunConfig resolve(const Flags& f) {
  json doc = read_json(f.config);
  if (f.nodes_per_edge) {
    doc["grid"] = json{{"nodes_per_edge", *f.nodes_per_edge}};
  } else if (f.h) {
    doc["grid"] = json{{"h", *f.h}};
  }
  json& scheme = doc["scheme"];
  if (scheme.is_null()) scheme = json::object();
  if (f.epsilon) scheme["epsilon"] = *f.epsilon;
  if (f.junction_mode) scheme["junction_mode"] = *f.junction_mode;
  if (f.boundary_mode) scheme["boundary_mode"] = *f.boundary_mode;
  if (f.flux) scheme["flux"] = *f.flux;
  if (f.lf_theta) {
    if (*f.lf_theta == "auto") {
      scheme["lf_theta"] = "auto";
    } else {
      try {
        scheme["lf_theta"] = std::stod(*f.lf_theta);
      } catch (...) {
        throw Error(ErrorCode::MalformedInput, "--lf-theta must be auto or a number");
      }
    }
  }
  json& solver = doc["solver"];
  if (solver.is_null()) solver = json::object();
  if (f.tol) solver["tol"] = *f.tol;
  if (f.max_sweeps) solver["max_sweeps"] = *f.max_sweeps;
  if (f.method) solver["method"] = *f.method;
  if (f.schedule) solver["epsilon_schedule"] = *f.schedule;
  if (f.deterministic) solver["deterministic"] = true;
  if (!f.resolutions.empty()) doc["convergence"]["resolutions"] = f.resolutions;
  return parse_run_config(doc);
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Manifest {
  json doc;
  std::string dir;

  Manifest(const std::string& command, const RunConfig& cfg, std::string out) : dir(std::move(out)) {
    doc = {{"tool", "knet"},
           {"version", kVersion},
           {"command", command},
           {"csv_schema", kSolutionCsvSchema},
           {"started", timestamp()},
           {"deterministic", cfg.deterministic},
           {"workers", worker_count(cfg.deterministic)},
           {"config", cfg.to_json()},
           {"stages", json::array()},
           {"outputs", json::array()}};
  }
  std::string path(const std::string& name) const { return (std::filesystem::path(dir) / name).string(); }
  void emit(const std::string& name, const std::string& content) {
    write_atomic(path(name), content);
    doc["outputs"].push_back(name);
  }
  void stage(json s) { doc["stages"].push_back(std::move(s)); }
  void finish() {
    doc["finished"] = timestamp();
    doc["outputs"].push_back("manifest.json");
    write_atomic(path("manifest.json"), doc.dump(2) + "\n");
  }
};

json result_json(const SolveResult& r) {
  json j{{"converged", r.converged},
         {"iterations", r.iterations},
         {"sweeps", r.sweeps},
         {"newton_steps", r.newton_steps},
         {"residual", r.residual_norm},
         {"bracket_violations", r.bracket_violations}};
  if (r.status) j["status"] = to_string(*r.status);
  return j;
}

int cmd_solve(const Flags& f) {
  RunConfig cfg = resolve(f);
  Manifest man("solve", cfg, f.out_dir);
  Grid grid = cfg.grid();
  ResidualSystem sys = assemble(cfg.problem, grid, cfg.scheme);
  Barriers bar = build_barriers(sys);
  GridFunction start(sys.size());
  for (std::size_t k = 0; k < start.size(); ++k) start[k] = 0.5 * (bar.lower[k] + bar.upper[k]);
  SolveResult r = solve(sys, cfg.solver, start, &bar);
  json st = result_json(r);
  st["stage"] = "solve";
  st["nodes"] = grid.size();
  st["mesh_size"] = grid.mesh_size();
  st["barriers"] = {{"construction", bar.construction}, {"level", bar.level}, {"slope", bar.slope}};
  man.stage(st);
  man.emit("solution.csv", format_solution_csv(grid, r.solution));
  man.finish();
  if (!r.converged) {
    std::cerr << "code: MaxSweepsExceeded: residual " << r.residual_norm << " after " << r.iterations << " iterations\n";
    return 1;
  }
  return 0;
}

int cmd_sweep_epsilon(const Flags& f) {
  RunConfig cfg = resolve(f);
  Manifest man("sweep-epsilon", cfg, f.out_dir);
  Grid grid = cfg.grid();
  VanishingViscosityReport rep = vanishing_viscosity(cfg.problem, grid, cfg.schedule.values(), cfg.solver, cfg.scheme);
  json st = rep.to_json();
  st["stage"] = "sweep-epsilon";
  man.stage(st);
  man.emit("limit.csv", format_solution_csv(grid, rep.limit.solution));
  for (std::size_t k = 0; k < rep.runs.size(); ++k)
    man.emit("eps_" + std::to_string(k) + ".csv", format_solution_csv(grid, rep.runs[k].result.solution));
  man.emit("epsilon_report.json", st.dump(2) + "\n");
  man.finish();
  return 0;
}

int cmd_verify(const std::string& solution, const std::string& problem, const std::string& report) {
  RunConfig cfg = parse_run_config(read_json(problem));
  auto [grid, u] = read_solution_csv(solution, cfg.network);
  DiagnosticsReport rep = verify_solution(cfg.problem, grid, u, cfg.analysis);
  json j = rep.to_json(grid.network());
  j["solution"] = solution;
  j["problem"] = problem;
  write_atomic(report, j.dump(2) + "\n");
  if (!rep.passed()) {
    std::cerr << "code: VerificationFailed: " << rep.failures() << " check(s) failed, see " << report << "\n";
    return 2;
  }
  return 0;
}

ReferenceSolution reference_for(const RunConfig& cfg, const Grid& finest, std::size_t factor, const std::string& kind) {
  const bool linear = cfg.reference == "direct" || (cfg.reference == "auto" && kind == "direct");
  if (linear) {
    Grid fine = finest.refined(factor);
    ReferenceSolution r = direct_linear_solve(*cfg.problem, fine, cfg.scheme);
    return r;
  }
  SolveConfig sc = cfg.solver;
  Grid fine = finest.refined(factor);
  ResidualSystem sys = assemble(cfg.problem, fine, cfg.scheme);
  SolveResult r = solve(sys, sc);
  if (!r.converged) throw Error(ErrorCode::MaxSweepsExceeded, "reference solve did not converge");
  return ReferenceSolution{fine, r.solution, "fine-grid", 0.0, r.residual_norm};
}

int cmd_convergence(const Flags& f, const std::string& table) {
  RunConfig cfg = resolve(f);
  if (cfg.resolutions.size() < 3) throw Error(ErrorCode::MalformedInput, "convergence table needs at least 3 resolutions");
  Manifest man("convergence-table", cfg, f.out_dir);
  std::vector<Grid> grids;
  for (double h : cfg.resolutions) grids.push_back(cfg.grid_with_spacing(h));
  std::size_t finest = 0;
  for (std::size_t i = 1; i < grids.size(); ++i)
    if (grids[i].mesh_size() < grids[finest].mesh_size()) finest = i;
  const std::string kind = linear_oracle_applies(*cfg.problem, grids[finest], cfg.scheme) ? "direct" : "fine";
  ReferenceSolution ref = reference_for(cfg, grids[finest], cfg.reference_factor, kind);

  std::string out = "h,error,order,iterations,wall_time\n";
  double prev_e = 0.0, prev_h = 0.0;
  std::vector<double> errors(grids.size()), times(grids.size());
  std::vector<std::size_t> iters(grids.size());
  bool all_converged = true;
  for (std::size_t i = 0; i < grids.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    ResidualSystem sys = assemble(cfg.problem, grids[i], cfg.scheme);
    SolveResult r = solve(sys, cfg.solver);
    times[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_converged = all_converged && r.converged;
    iters[i] = r.iterations;
    errors[i] = sup_difference(r.solution, transfer(ref.grid, ref.values, grids[i]));
  }
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const double h = grids[i].mesh_size();
    std::string order;
    if (i > 0 && prev_e > 0.0 && errors[i] > 0.0) order = format_double(std::log(prev_e / errors[i]) / std::log(prev_h / h));
    out += format_double(h) + "," + format_double(errors[i]) + "," + order + "," + std::to_string(iters[i]) + "," +
           format_double(times[i]) + "\n";
    prev_e = errors[i];
    prev_h = h;
  }
  man.stage({{"stage", "convergence-table"}, {"reference", ref.to_json()}, {"errors", errors}, {"converged", all_converged}});
  if (table.empty()) {
    man.emit("convergence.csv", out);
  } else {
    write_atomic(table, out);
    man.doc["outputs"].push_back(table);
  }
  man.finish();
  return all_converged ? 0 : 1;
}

int cmd_oracle(const Flags& f) {
  RunConfig cfg = resolve(f);
  Manifest man("oracle", cfg, f.out_dir);
  Grid grid = cfg.grid();
  ReferenceSolution ref = [&]() {
    if (cfg.reference != "fine" && linear_oracle_applies(*cfg.problem, grid, cfg.scheme)) return direct_linear_solve(*cfg.problem, grid, cfg.scheme);
    return fine_grid_reference(cfg.problem, grid, std::max<std::size_t>(4, cfg.reference_factor), cfg.scheme, cfg.solver);
  }();
  json st = ref.to_json();
  st["stage"] = "oracle";
  man.stage(st);
  man.emit("oracle.csv", format_solution_csv(grid, ref.values));
  man.finish();
  return 0;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::MaxSweepsExceeded:
    case ErrorCode::LocalRootBracketFailed:
    case ErrorCode::SingularLinearization: return 1;
    case ErrorCode::MonotonicityProbeFailed:
    case ErrorCode::BarrierConstructionFailed: return 2;
    default: return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone solver and verifier for degenerate elliptic Hamilton-Jacobi equations on networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Flags solve_f, eps_f, conv_f, oracle_f;
  auto* s = app.add_subcommand("solve", "solve the configured problem");
  add_run_flags(s, solve_f);
  auto* e = app.add_subcommand("sweep-epsilon", "vanishing-viscosity continuation");
  add_run_flags(e, eps_f);
  auto* c = app.add_subcommand("convergence-table", "errors against an oracle over resolutions");
  add_run_flags(c, conv_f);
  std::string table;
  c->add_option("--resolutions", conv_f.resolutions, "spacings, at least three")->delimiter(',');
  c->add_option("--table", table, "CSV output path (default <out-dir>/convergence.csv)");
  auto* o = app.add_subcommand("oracle", "direct linear or fine-grid reference");
  add_run_flags(o, oracle_f);

  std::string sol_csv, prob_json, report_json;
  auto* v = app.add_subcommand("verify", "check a solution against the structural predictions");
  v->add_option("--solution", sol_csv, "solution CSV (edge_id,t,u)")->required();
  v->add_option("--problem", prob_json, "config JSON describing the problem")->required();
  v->add_option("--report", report_json, "report JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int rc = app.exit(ex);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (s->parsed()) return cmd_solve(solve_f);
    if (e->parsed()) return cmd_sweep_epsilon(eps_f);
    if (c->parsed()) return cmd_convergence(conv_f, table);
    if (o->parsed()) return cmd_oracle(oracle_f);
    if (v->parsed()) return cmd_verify(sol_csv, prob_json, report_json);
  } catch (const Error& ex) {
    std::cerr << "code: " << ex.what() << "\n";
    return exit_code(ex.code());
  } catch (const std::exception& ex) {
    std::cerr << "code: Internal: " << ex.what() << "\n";
    return 3;
  }
  return 3;
}
