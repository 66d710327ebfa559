#include "knet/config.hpp"

#include <sstream>

#include "knet/catalog.hpp"
#include "knet/errors.hpp"
#include "knet/io.hpp"

namespace knet {

using nlohmann::json;

std::string EpsilonSchedule::to_string() const {
  std::ostringstream s;
  s.precision(17);
  s << "g:" << start << ":" << ratio << ":" << count;
  return s.str();
}

EpsilonSchedule parse_schedule(const std::string& text) {
  EpsilonSchedule s;
  double start = 0, ratio = 0;
  long count = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "g:%lf:%lf:%ld%c", &start, &ratio, &count, &tail) != 3 || count < 1)
    throw Error(ErrorCode::MalformedInput, "epsilon schedule must read g:start:ratio:count");
  s.start = start;
  s.ratio = ratio;
  s.count = static_cast<std::size_t>(count);
  s.values();
  return s;
}

Grid RunConfig::grid() const {
  if (nodes_per_edge) return Grid::uniform(network, *nodes_per_edge);
  return Grid::with_spacing(network, spacing ? *spacing : 0.01);
}

Grid RunConfig::grid_with_spacing(double h) const { return Grid::with_spacing(network, h); }

namespace {

void read_scheme(const json& j, SchemeOptions& s) {
  if (j.contains("epsilon")) s.epsilon = j.at("epsilon").get<double>();
  if (j.contains("junction_mode")) s.junction = junction_mode_from_string(j.at("junction_mode").get<std::string>());
  if (j.contains("boundary_mode")) s.boundary = boundary_mode_from_string(j.at("boundary_mode").get<std::string>());
  if (j.contains("flux")) s.flux = junction_flux_from_string(j.at("flux").get<std::string>());
  if (j.contains("lf_theta")) {
    const auto& t = j.at("lf_theta");
    if (t.is_string()) {
      if (t.get<std::string>() != "auto") throw Error(ErrorCode::MalformedInput, "lf_theta must be auto or a number");
      s.lf_theta.reset();
    } else {
      s.lf_theta = t.get<double>();
    }
  }
  if (j.contains("probe_samples")) s.probe_samples = j.at("probe_samples").get<std::size_t>();
  if (j.contains("probe_seed")) s.probe_seed = j.at("probe_seed").get<std::uint64_t>();
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorCode::MalformedInput, "config must be a JSON object");
    RunConfig c;
    if (doc.contains("catalog")) {
      c.catalog = doc.at("catalog").get<std::string>();
      CatalogEntry e = catalog_entry(*c.catalog);
      c.network_doc = e.network_doc;
      c.problem_doc = e.problem_doc;
      c.network = e.network;
      c.problem = e.problem;
      c.scheme = e.scheme;
    } else {
      c.network_doc = doc.at("network");
      c.problem_doc = doc.at("problem");
      auto net = std::make_shared<const Network>(network_from_json(c.network_doc));
      c.network = net;
      c.problem = std::make_shared<const NetworkProblem>(problem_from_json(c.problem_doc, net));
    }
    const json grid = doc.value("grid", json::object());
    if (grid.contains("nodes_per_edge")) c.nodes_per_edge = grid.at("nodes_per_edge").get<std::size_t>();
    if (grid.contains("h")) c.spacing = grid.at("h").get<double>();
    read_scheme(doc.value("scheme", json::object()), c.scheme);

    const json sol = doc.value("solver", json::object());
    if (sol.contains("tol")) c.solver.tolerance = sol.at("tol").get<double>();
    if (sol.contains("max_sweeps")) c.solver.max_sweeps = sol.at("max_sweeps").get<std::size_t>();
    if (sol.contains("max_newton_steps")) c.solver.max_newton_steps = sol.at("max_newton_steps").get<std::size_t>();
    if (sol.contains("method")) c.solver.method = method_from_string(sol.at("method").get<std::string>());
    if (sol.contains("node_tolerance")) c.solver.node_tolerance = sol.at("node_tolerance").get<double>();
    if (sol.contains("epsilon_schedule")) c.schedule = parse_schedule(sol.at("epsilon_schedule").get<std::string>());
    if (sol.contains("deterministic")) c.deterministic = sol.at("deterministic").get<bool>();

    const json an = doc.value("analysis", json::object());
    c.analysis.scheme = c.scheme;
    if (an.contains("window")) c.analysis.window = an.at("window").get<std::size_t>();
    if (an.contains("slope_constant")) c.analysis.slope_constant = an.at("slope_constant").get<double>();
    if (an.contains("residual_tolerance")) c.analysis.residual_tolerance = an.at("residual_tolerance").get<double>();
    if (an.contains("boundary_tolerance")) c.analysis.boundary_tolerance = an.at("boundary_tolerance").get<double>();
    if (an.contains("delta_fractions")) c.analysis.delta_fractions = an.at("delta_fractions").get<std::vector<double>>();
    if (an.contains("probes")) c.analysis.probes = an.at("probes").get<bool>();

    const json conv = doc.value("convergence", json::object());
    if (conv.contains("resolutions")) c.resolutions = conv.at("resolutions").get<std::vector<double>>();
    if (conv.contains("reference")) c.reference = conv.at("reference").get<std::string>();
    if (conv.contains("factor")) c.reference_factor = conv.at("factor").get<std::size_t>();
    if (c.reference != "auto" && c.reference != "direct" && c.reference != "fine")
      throw Error(ErrorCode::MalformedInput, "convergence.reference must be auto, direct or fine");
    if (!(c.solver.tolerance > 0.0) || c.solver.max_sweeps < 1)
      throw Error(ErrorCode::MalformedInput, "solver tol must be positive and max_sweeps at least 1");
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json(path)); }

json RunConfig::to_json() const {
  json j;
  if (catalog) j["catalog"] = *catalog;
  j["network"] = network_doc;
  j["problem"] = problem_doc;
  json g = json::object();
  if (nodes_per_edge) g["nodes_per_edge"] = *nodes_per_edge;
  if (spacing) g["h"] = *spacing;
  j["grid"] = g;
  j["scheme"] = {{"epsilon", scheme.epsilon},
                 {"junction_mode", to_string(scheme.junction)},
                 {"boundary_mode", to_string(scheme.boundary)},
                 {"flux", to_string(scheme.flux)},
                 {"probe_samples", scheme.probe_samples},
                 {"probe_seed", scheme.probe_seed}};
  j["scheme"]["lf_theta"] = scheme.lf_theta ? json(*scheme.lf_theta) : json("auto");
  j["solver"] = {{"tol", solver.tolerance},
                 {"max_sweeps", solver.max_sweeps},
                 {"max_newton_steps", solver.max_newton_steps},
                 {"method", to_string(solver.method)},
                 {"node_tolerance", solver.node_tolerance},
                 {"epsilon_schedule", schedule.to_string()},
                 {"deterministic", deterministic}};
  json an{{"slope_constant", analysis.slope_constant},
          {"residual_tolerance", analysis.residual_tolerance},
          {"boundary_tolerance", analysis.boundary_tolerance},
          {"delta_fractions", analysis.delta_fractions},
          {"probes", analysis.probes}};
  if (analysis.window) an["window"] = *analysis.window;
  j["analysis"] = an;
  j["convergence"] = {{"resolutions", resolutions}, {"reference", reference}, {"factor", reference_factor}};
  return j;
}

}  // namespace knet
