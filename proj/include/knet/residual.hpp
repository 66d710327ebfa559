#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/grid.hpp"
#include "knet/problem.hpp"

namespace knet {

enum class JunctionMode { kirchhoff, minmax };
enum class BoundaryMode { automatic, strong, relaxed };
// one_sided: delta_i = (u_1 - u_v) / h.  corrected: on edges where the diffusion dominates the
// cell (C_H h <= 2 (a + eps)), delta_i is shifted by -(h/2) u'' with u'' taken from the edge equation.
enum class JunctionFlux { one_sided, corrected };
enum class NodeClass { interior, junction, boundary_strong, boundary_relaxed };

const char* to_string(JunctionMode m);
const char* to_string(BoundaryMode m);
const char* to_string(JunctionFlux m);
const char* to_string(NodeClass c);
JunctionMode junction_mode_from_string(const std::string& s);
BoundaryMode boundary_mode_from_string(const std::string& s);
JunctionFlux junction_flux_from_string(const std::string& s);

struct SchemeOptions {
  double epsilon = 0.0;
  JunctionMode junction = JunctionMode::kirchhoff;
  BoundaryMode boundary = BoundaryMode::automatic;
  JunctionFlux flux = JunctionFlux::one_sided;
  std::optional<double> lf_theta;  // empty: theta_E = C_H on each edge
  std::size_t probe_samples = 8;
  std::uint64_t probe_seed = 1;

  nlohmann::json to_json() const;
};

struct RowEntry {
  std::size_t node = 0;
  double value = 0.0;
};

struct LinearizedRow {
  double value = 0.0;
  std::vector<RowEntry> entries;  // own node first

  double own_slope() const { return entries.front().value; }
};

struct ProbeWitness {
  std::size_t node = 0;
  std::size_t perturbed = 0;
  int direction = 1;  // +1: residual increased with a neighbor / -1: decreased with own value
  double slope = 0.0;
};

struct ProbeReport {
  bool passed = true;
  std::size_t checks = 0;
  std::size_t samples = 0;
  std::optional<ProbeWitness> witness;
};

class ResidualSystem {
 public:
  ResidualSystem(std::shared_ptr<const NetworkProblem> problem, Grid grid, SchemeOptions options);

  const Grid& grid() const { return grid_; }
  const NetworkProblem& problem() const { return *problem_; }
  std::shared_ptr<const NetworkProblem> problem_ptr() const { return problem_; }
  const SchemeOptions& options() const { return options_; }
  std::size_t size() const { return grid_.size(); }
  double epsilon() const { return options_.epsilon; }
  double theta(std::size_t e) const { return theta_.at(e); }
  NodeClass node_class(std::size_t k) const { return class_.at(k); }
  // Whether edge e enters the degenerate set at vertex v (a_E(v) + eps = 0).
  bool degenerate_at(std::size_t v, std::size_t e) const;
  bool corrected_at(std::size_t v, std::size_t e) const;

  // Residuals are reported as R(u) - offset, so solving drives R(u) to the offset.
  void set_offset(GridFunction offset);
  const GridFunction& offset() const { return offset_; }

  double residual_at(const GridFunction& u, std::size_t k) const;
  GridFunction residual(const GridFunction& u) const;
  double residual_norm(const GridFunction& u) const;
  LinearizedRow linearize(const GridFunction& u, std::size_t k) const;
  std::vector<std::size_t> stencil(std::size_t k) const;

  double interior_residual(const GridFunction& u, std::size_t k) const;
  double junction_residual(const GridFunction& u, std::size_t v) const;
  double boundary_residual(const GridFunction& u, std::size_t v) const;

  // Discrete inward derivatives (u_1 - u_v) / h at an interior vertex, in incidence order.
  std::vector<double> inward_differences(const GridFunction& u, std::size_t v) const;
  // Upwind state-constraint residual lambda u_v + inf_{q <= delta} H(v, s q) at vertex v along edge e.
  double upwind_vertex_residual(const GridFunction& u, std::size_t v, std::size_t e) const;

  ProbeReport probe_monotonicity(std::size_t samples, std::uint64_t seed, double step = 1e-6) const;

 private:
  struct Arm {
    std::size_t edge = 0;
    std::size_t neighbor = 0;
    double h = 0.0;
    double sign = 1.0;      // +1 when the vertex sits at t = 0
    double t_vertex = 0.0;
    double diffusion = 0.0;  // a_E(v) + eps
    bool degenerate = false;
    bool corrected = false;
  };

  struct Eval {
    double value;
    double d_own;
    std::vector<double> d_arm;
  };

  Eval eval_arm_upwind(const GridFunction& u, std::size_t v, const Arm& arm) const;
  Eval eval_kirchhoff(const GridFunction& u, std::size_t v) const;
  Eval eval_junction(const GridFunction& u, std::size_t v) const;
  Eval eval_boundary(const GridFunction& u, std::size_t v) const;

  std::shared_ptr<const NetworkProblem> problem_;
  Grid grid_;
  SchemeOptions options_;
  std::vector<double> theta_;
  std::vector<NodeClass> class_;
  std::vector<std::size_t> left_, right_;
  std::vector<double> diff_;  // a + eps at interior nodes
  std::vector<std::vector<Arm>> arms_;  // by vertex
  GridFunction offset_;
};

// Builds the system and certifies it with perturbation probes; throws MonotonicityProbeFailed.
ResidualSystem assemble(std::shared_ptr<const NetworkProblem> problem, const Grid& grid, const SchemeOptions& options);

}  // namespace knet
