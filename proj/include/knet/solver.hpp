#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/errors.hpp"
#include "knet/residual.hpp"

namespace knet {

enum class Method { sweep, newton, hybrid };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct SolveConfig {
  double tolerance = 1e-10;
  std::size_t max_sweeps = 20000;
  std::size_t max_newton_steps = 200;
  Method method = Method::hybrid;
  double armijo = 1e-4;
  std::size_t max_backtracks = 30;
  double node_tolerance = 1e-13;
  bool record_history = false;

  nlohmann::json to_json() const;
};

struct Barriers {
  GridFunction lower;
  GridFunction upper;
  std::string construction;  // "star-affine" or "graph-profile"
  double level = 0.0;        // K_1 or A
  double slope = 0.0;        // K_2 or B
};

struct SolveResult {
  GridFunction solution;
  std::size_t iterations = 0;
  std::size_t sweeps = 0;
  std::size_t newton_steps = 0;
  double residual_norm = 0.0;
  bool converged = false;
  std::size_t bracket_violations = 0;
  std::optional<ErrorCode> status;  // MaxSweepsExceeded when the budget ran out
  std::vector<double> history;      // residual norm after each iteration when recorded
};

Barriers build_barriers(const ResidualSystem& system);

SolveResult sweep_solve(const ResidualSystem& system, const SolveConfig& config, const GridFunction& initial,
                        const Barriers* barriers = nullptr);
SolveResult newton_solve(const ResidualSystem& system, const SolveConfig& config, const GridFunction& initial,
                         const Barriers* barriers = nullptr);
// Dispatches on config.method.
SolveResult solve(const ResidualSystem& system, const SolveConfig& config, const GridFunction& initial,
                  const Barriers* barriers = nullptr);
// Builds barriers and starts from their midpoint.
SolveResult solve(const ResidualSystem& system, const SolveConfig& config);

struct EpsilonRun {
  double epsilon = 0.0;
  SolveResult result;
  std::vector<double> cauchy;      // sup over Gamma^delta of |u^{eps_k} - u^{eps_{k-1}}|, per delta
  std::vector<double> to_limit;    // sup over Gamma^delta of |u^{eps_k} - u^0|, per delta
  std::vector<double> boundary_gap;  // |u^eps(v) - u^0(v)| per boundary vertex
};

struct VanishingViscosityReport {
  std::vector<double> deltas;
  std::vector<EpsilonRun> runs;
  SolveResult limit;  // eps = 0 solve with the configured (relaxed by default) boundary mode
  std::vector<std::size_t> boundary_vertices;

  nlohmann::json to_json() const;
};

std::vector<double> geometric_schedule(double start, double ratio, std::size_t count);

VanishingViscosityReport vanishing_viscosity(std::shared_ptr<const NetworkProblem> problem, const Grid& grid,
                                             const std::vector<double>& schedule, const SolveConfig& config,
                                             const SchemeOptions& base);

}  // namespace knet
