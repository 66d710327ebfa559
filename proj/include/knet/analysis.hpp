#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/grid.hpp"
#include "knet/problem.hpp"
#include "knet/residual.hpp"

namespace knet {

enum class Side { sub, super };

const char* to_string(Side s);

struct Check {
  std::string name;
  std::string location;
  double margin = 0.0;  // signed slack; the check passes when margin >= -tolerance
  double tolerance = 0.0;
  std::string verdict;  // PASS, FAIL, or NO_ACTIVE
  nlohmann::json witness;

  bool failed() const { return verdict == "FAIL"; }
  nlohmann::json to_json() const;
};

Check make_check(std::string name, std::string location, double margin, double tolerance, nlohmann::json witness);

// psi(x) = L (rho(x, y) - K rho(x, y)^2) on the ball rho(., y) <= 1 / (4K).
struct ProbeFunction {
  NetworkPoint center;
  double L = 1.0;
  double K = 1.0;
  Side side = Side::sub;

  ProbeFunction(NetworkPoint center, double L, double K, Side side);
  double radius() const { return 0.25 / K; }
  double operator()(const Network& net, const NetworkPoint& x) const;
  // |d psi / d rho| at distance r from the center.
  double slope(double r) const { return L * (1.0 - 2.0 * K * r); }
  double curvature() const { return -2.0 * L * K; }
};

struct EdgeSlopes {
  std::size_t edge = 0;
  double upper = 0.0;  // max of the window's divided differences
  double lower = 0.0;  // min
  double fit = 0.0;    // least-squares slope through the vertex value
  double fit_residual = 0.0;
  std::size_t window = 0;
};

struct JunctionSlopes {
  std::size_t vertex = 0;
  std::size_t window = 0;
  std::vector<EdgeSlopes> edges;  // incidence order

  nlohmann::json to_json(const Network& net) const;
};

std::size_t default_window(const Grid& grid, std::size_t v);

// Divided differences (u(node_m) - u_v) / rho over m = 1..window on every incident edge.
JunctionSlopes estimate_junction_slopes(const Grid& grid, const GridFunction& u, std::size_t v, std::size_t window);

// Subsolution inequality lambda u_v + H_i(v, p) <= tol on [p_lower, p_upper] and the supersolution
// inequality >= -tol on the open interval, for every degenerate edge at v.
std::vector<Check> check_degenerate_edge_inequalities(const NetworkProblem& problem, const Grid& grid,
                                                      const GridFunction& u, std::size_t v,
                                                      const JunctionSlopes& slopes, double tol,
                                                      std::size_t samples = 17);

struct ProbeGrid {
  std::vector<double> L;
  std::vector<double> K;
  static ProbeGrid standard();  // L = 2^0..2^10, K = 2^0..2^6
};

// Worst clause value over the probes that touch u at grid node k from the requested side.
// verdict NO_ACTIVE when no probe touches.
Check probe_viscosity(const NetworkProblem& problem, const Grid& grid, const GridFunction& u, std::size_t k,
                      const ProbeGrid& probes, Side side, double tol, double epsilon = 0.0);

double lipschitz_on_interior(const Grid& grid, const GridFunction& u, double delta);

struct BoundaryRecord {
  std::size_t vertex = 0;
  double datum = 0.0;
  double value = 0.0;
  double gap = 0.0;  // h_v - u_v
  std::string status;  // attained, lost, overshoot
  std::optional<double> state_constraint;  // lambda u_v + inf_{q <= delta} H(v, s q) when available
  bool prop_applies = false;
};

std::vector<BoundaryRecord> boundary_loss_report(const NetworkProblem& problem, const Grid& grid,
                                                 const GridFunction& u, double tol, double epsilon = 0.0);

struct VerifyOptions {
  SchemeOptions scheme;
  double residual_tolerance = 1e-8;
  double slope_constant = 5.0;  // slope tolerance C (h + window h)
  std::optional<std::size_t> window;
  double boundary_tolerance = 1e-8;
  std::vector<double> delta_fractions{0.05, 0.1, 0.2};
  bool probes = true;
};

struct DiagnosticsReport {
  std::vector<Check> checks;
  std::vector<JunctionSlopes> slopes;
  std::vector<BoundaryRecord> boundary;
  std::vector<std::pair<double, double>> lipschitz;  // (delta, constant)
  double mesh_size = 0.0;

  bool passed() const;
  std::size_t failures() const;
  nlohmann::json to_json(const Network& net) const;
};

DiagnosticsReport verify_solution(std::shared_ptr<const NetworkProblem> problem, const Grid& grid,
                                  const GridFunction& u, const VerifyOptions& options = {});

}  // namespace knet
