#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/analysis.hpp"
#include "knet/grid.hpp"
#include "knet/problem.hpp"
#include "knet/residual.hpp"
#include "knet/solver.hpp"

namespace knet {

struct EpsilonSchedule {
  double start = 1.0;
  double ratio = 0.5;
  std::size_t count = 9;

  std::vector<double> values() const { return geometric_schedule(start, ratio, count); }
  std::string to_string() const;
};

// "g:start:ratio:count"
EpsilonSchedule parse_schedule(const std::string& text);

struct RunConfig {
  std::optional<std::string> catalog;
  nlohmann::json network_doc;
  nlohmann::json problem_doc;
  std::optional<std::size_t> nodes_per_edge;
  std::optional<double> spacing;
  SchemeOptions scheme;
  SolveConfig solver;
  EpsilonSchedule schedule;
  bool deterministic = true;
  VerifyOptions analysis;
  std::vector<double> resolutions{0.04, 0.02, 0.01};
  std::string reference = "auto";  // auto, direct, fine
  std::size_t reference_factor = 4;

  std::shared_ptr<const Network> network;
  std::shared_ptr<const NetworkProblem> problem;

  Grid grid() const;
  Grid grid_with_spacing(double h) const;
  nlohmann::json to_json() const;
};

// Parses the documented schema; `catalog` pulls the network, problem and scheme defaults from the
// built-in catalog.  Throws MalformedInput.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

}  // namespace knet
