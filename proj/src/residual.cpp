#include "knet/residual.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "knet/errors.hpp"

namespace knet {

const char* to_string(JunctionMode m) { return m == JunctionMode::kirchhoff ? "kirchhoff" : "minmax"; }

const char* to_string(BoundaryMode m) {
  switch (m) {
    case BoundaryMode::automatic: return "auto";
    case BoundaryMode::strong: return "strong";
    case BoundaryMode::relaxed: return "relaxed";
  }
  return "auto";
}

const char* to_string(JunctionFlux m) { return m == JunctionFlux::one_sided ? "one_sided" : "corrected"; }

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::interior: return "interior";
    case NodeClass::junction: return "junction";
    case NodeClass::boundary_strong: return "boundary-strong";
    case NodeClass::boundary_relaxed: return "boundary-relaxed";
  }
  return "interior";
}

JunctionMode junction_mode_from_string(const std::string& s) {
  if (s == "kirchhoff") return JunctionMode::kirchhoff;
  if (s == "minmax") return JunctionMode::minmax;
  throw Error(ErrorCode::MalformedInput, "unknown junction mode '" + s + "'");
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "auto") return BoundaryMode::automatic;
  if (s == "strong") return BoundaryMode::strong;
  if (s == "relaxed") return BoundaryMode::relaxed;
  throw Error(ErrorCode::MalformedInput, "unknown boundary mode '" + s + "'");
}

JunctionFlux junction_flux_from_string(const std::string& s) {
  if (s == "one_sided" || s == "one-sided") return JunctionFlux::one_sided;
  if (s == "corrected") return JunctionFlux::corrected;
  throw Error(ErrorCode::MalformedInput, "unknown junction flux '" + s + "'");
}

nlohmann::json SchemeOptions::to_json() const {
  nlohmann::json j{{"epsilon", epsilon},
                   {"junction_mode", to_string(junction)},
                   {"boundary_mode", to_string(boundary)},
                   {"junction_flux", to_string(flux)}};
  if (lf_theta)
    j["lf_theta"] = *lf_theta;
  else
    j["lf_theta"] = "auto";
  return j;
}

ResidualSystem::ResidualSystem(std::shared_ptr<const NetworkProblem> problem, Grid grid, SchemeOptions options)
    : problem_(std::move(problem)), grid_(std::move(grid)), options_(options) {
  check_problem(*problem_);
  const Network& net = grid_.network();
  if (net.uid() != problem_->network->uid())
    throw Error(ErrorCode::PointsOnDifferentNetworks, "grid and problem use different networks");
  if (!(options_.epsilon >= 0.0)) throw Error(ErrorCode::MalformedInput, "epsilon must be nonnegative");

  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    double th = options_.lf_theta ? *options_.lf_theta : problem_->edges[e].hamiltonian.c_h;
    if (!(th >= 0.0)) throw Error(ErrorCode::MalformedInput, "Lax-Friedrichs theta must be nonnegative");
    theta_.push_back(th);
  }

  const std::size_t n = grid_.size();
  class_.assign(n, NodeClass::interior);
  left_.assign(n, 0);
  right_.assign(n, 0);
  diff_.assign(n, 0.0);
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const std::size_t m = grid_.nodes_on_edge(e);
    for (std::size_t j = 1; j + 1 < m; ++j) {
      std::size_t k = grid_.node(e, j);
      left_[k] = grid_.node(e, j - 1);
      right_[k] = grid_.node(e, j + 1);
      diff_[k] = problem_->edges[e].diffusion.a(grid_.info(k).t) + options_.epsilon;
    }
  }

  arms_.resize(net.vertex_count());
  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    for (const auto& inc : net.incident(v)) {
      Arm arm;
      arm.edge = inc.edge;
      arm.neighbor = grid_.neighbor_of_vertex(v, inc.edge);
      arm.h = grid_.spacing(inc.edge);
      arm.sign = inc.at_start ? 1.0 : -1.0;
      arm.t_vertex = inc.at_start ? 0.0 : net.edge(inc.edge).length;
      arm.diffusion = problem_->edges[inc.edge].diffusion.a(arm.t_vertex) + options_.epsilon;
      arm.degenerate = arm.diffusion == 0.0;
      const Hamiltonian& H = problem_->edges[inc.edge].hamiltonian;
      arm.corrected = options_.flux == JunctionFlux::corrected && arm.diffusion > 0.0 &&
                      H.c_h * arm.h <= 2.0 * arm.diffusion;
      arms_[v].push_back(arm);
    }
    const Hamiltonian& H0 = problem_->edges[arms_[v].front().edge].hamiltonian;
    const bool has_envelope = H0.coercive || H0.lower_left_fn;
    if (net.is_boundary(v)) {
      const Arm& arm = arms_[v].front();
      NodeClass c = NodeClass::boundary_strong;
      if (options_.boundary == BoundaryMode::relaxed) {
        if (!has_envelope)
          throw Error(ErrorCode::InvalidMode, "relaxed boundary mode at vertex " + std::to_string(net.vertex(v).id) +
                                                  " needs a coercive Hamiltonian");
        c = NodeClass::boundary_relaxed;
      } else if (options_.boundary == BoundaryMode::automatic && arm.diffusion == 0.0 && H0.coercive) {
        c = NodeClass::boundary_relaxed;
      }
      class_[v] = c;
    } else {
      class_[v] = NodeClass::junction;
      if (options_.junction == JunctionMode::minmax)
        for (const Arm& arm : arms_[v]) {
          const Hamiltonian& H = problem_->edges[arm.edge].hamiltonian;
          if (arm.degenerate && !(H.coercive || H.lower_left_fn))
            throw Error(ErrorCode::InvalidMode, "minmax junction mode needs coercive Hamiltonians on degenerate edges");
        }
    }
  }
}

bool ResidualSystem::degenerate_at(std::size_t v, std::size_t e) const {
  for (const Arm& a : arms_.at(v))
    if (a.edge == e) return a.degenerate;
  throw Error(ErrorCode::EdgeNotIncident, "edge not incident to vertex");
}

bool ResidualSystem::corrected_at(std::size_t v, std::size_t e) const {
  for (const Arm& a : arms_.at(v))
    if (a.edge == e) return a.corrected;
  throw Error(ErrorCode::EdgeNotIncident, "edge not incident to vertex");
}

double ResidualSystem::interior_residual(const GridFunction& u, std::size_t k) const {
  if (k >= size() || class_[k] != NodeClass::interior)
    throw Error(ErrorCode::NodeNotInterior, "node " + std::to_string(k) + " is not inside an edge");
  const NodeInfo& ni = grid_.info(k);
  const std::size_t e = ni.edge;
  const double h = grid_.spacing(e);
  const double um = u[left_[k]], u0 = u[k], up = u[right_[k]];
  const double pm = (u0 - um) / h, pp = (up - u0) / h;
  const Hamiltonian& H = problem_->edges[e].hamiltonian;
  return problem_->lambda * u0 - diff_[k] * (up - 2.0 * u0 + um) / (h * h) + H(ni.t, 0.5 * (pm + pp)) -
         0.5 * theta_[e] * (pp - pm);
}

ResidualSystem::Eval ResidualSystem::eval_arm_upwind(const GridFunction& u, std::size_t v, const Arm& arm) const {
  const Hamiltonian& H = problem_->edges[arm.edge].hamiltonian;
  const double delta = (u[arm.neighbor] - u[v]) / arm.h;
  Envelope env = arm.sign > 0 ? H.lower_left(arm.t_vertex, delta) : H.lower_right(arm.t_vertex, -delta);
  const double d_delta = arm.sign > 0 ? env.slope : -env.slope;
  return Eval{problem_->lambda * u[v] + env.value, problem_->lambda - d_delta / arm.h, {d_delta / arm.h}};
}

ResidualSystem::Eval ResidualSystem::eval_kirchhoff(const GridFunction& u, std::size_t v) const {
  const auto& arms = arms_[v];
  const std::size_t N = arms.size();
  std::vector<double> delta(N), d_own(N), d_nb(N);
  const double uv = u[v];
  for (std::size_t i = 0; i < N; ++i) {
    const Arm& a = arms[i];
    delta[i] = (u[a.neighbor] - uv) / a.h;
    d_own[i] = -1.0 / a.h;
    d_nb[i] = 1.0 / a.h;
    if (a.corrected) {
      const Hamiltonian& H = problem_->edges[a.edge].hamiltonian;
      const double p = a.sign * delta[i];
      const double hv = H(a.t_vertex, p);
      const double hp = H.dp(a.t_vertex, p) * a.sign;
      const double w = 0.5 * a.h / a.diffusion;
      d_own[i] -= w * (problem_->lambda - hp / a.h);
      d_nb[i] -= w * hp / a.h;
      delta[i] -= w * (problem_->lambda * uv + hv);
    }
  }
  const KirchhoffCondition& F = problem_->kirchhoff_at(v);
  double dr = 0.0;
  std::vector<double> dp(N);
  F.gradient(uv, delta, dr, dp);
  Eval ev{F(uv, delta), dr, std::vector<double>(N)};
  for (std::size_t i = 0; i < N; ++i) {
    ev.d_own += dp[i] * d_own[i];
    ev.d_arm[i] = dp[i] * d_nb[i];
  }
  return ev;
}

ResidualSystem::Eval ResidualSystem::eval_junction(const GridFunction& u, std::size_t v) const {
  Eval best = eval_kirchhoff(u, v);
  if (options_.junction == JunctionMode::kirchhoff) return best;
  const auto& arms = arms_[v];
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (!arms[i].degenerate) continue;
    Eval e = eval_arm_upwind(u, v, arms[i]);
    if (e.value > best.value) {
      best.value = e.value;
      best.d_own = e.d_own;
      std::fill(best.d_arm.begin(), best.d_arm.end(), 0.0);
      best.d_arm[i] = e.d_arm[0];
    }
  }
  return best;
}

ResidualSystem::Eval ResidualSystem::eval_boundary(const GridFunction& u, std::size_t v) const {
  const double gap = u[v] - problem_->dirichlet_at(v);
  Eval strong{gap, 1.0, {0.0}};
  if (class_[v] == NodeClass::boundary_strong) return strong;
  Eval e = eval_arm_upwind(u, v, arms_[v].front());
  return e.value > gap ? e : strong;
}

double ResidualSystem::junction_residual(const GridFunction& u, std::size_t v) const {
  if (v >= grid_.network().vertex_count() || class_[v] != NodeClass::junction)
    throw Error(ErrorCode::VertexNotInterior, "vertex index " + std::to_string(v) + " is not interior");
  return eval_junction(u, v).value;
}

double ResidualSystem::boundary_residual(const GridFunction& u, std::size_t v) const {
  if (v >= grid_.network().vertex_count() || class_[v] == NodeClass::junction || class_[v] == NodeClass::interior)
    throw Error(ErrorCode::VertexNotBoundary, "vertex index " + std::to_string(v) + " is not a boundary vertex");
  return eval_boundary(u, v).value;
}

std::vector<double> ResidualSystem::inward_differences(const GridFunction& u, std::size_t v) const {
  std::vector<double> d;
  for (const Arm& a : arms_.at(v)) d.push_back((u[a.neighbor] - u[v]) / a.h);
  return d;
}

double ResidualSystem::upwind_vertex_residual(const GridFunction& u, std::size_t v, std::size_t e) const {
  for (const Arm& a : arms_.at(v))
    if (a.edge == e) return eval_arm_upwind(u, v, a).value;
  throw Error(ErrorCode::EdgeNotIncident, "edge not incident to vertex");
}

double ResidualSystem::residual_at(const GridFunction& u, std::size_t k) const {
  const double shift = offset_.empty() ? 0.0 : offset_[k];
  switch (class_[k]) {
    case NodeClass::interior: return interior_residual(u, k) - shift;
    case NodeClass::junction: return eval_junction(u, k).value - shift;
    default: return eval_boundary(u, k).value - shift;
  }
}

void ResidualSystem::set_offset(GridFunction offset) {
  if (!offset.empty() && (offset.size() != size() || !is_finite(offset)))
    throw Error(ErrorCode::MalformedInput, "offset must be finite with one value per node");
  offset_ = std::move(offset);
}

GridFunction ResidualSystem::residual(const GridFunction& u) const {
  GridFunction r(size());
  for (std::size_t k = 0; k < size(); ++k) r[k] = residual_at(u, k);
  return r;
}

double ResidualSystem::residual_norm(const GridFunction& u) const {
  double m = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    double r = std::abs(residual_at(u, k));
    if (!(r <= m)) m = std::isnan(r) ? r : std::max(m, r);
    if (std::isnan(m)) return m;
  }
  return m;
}

std::vector<std::size_t> ResidualSystem::stencil(std::size_t k) const {
  if (class_[k] == NodeClass::interior) return {k, left_[k], right_[k]};
  std::vector<std::size_t> s{k};
  for (const Arm& a : arms_[k]) s.push_back(a.neighbor);
  return s;
}

LinearizedRow ResidualSystem::linearize(const GridFunction& u, std::size_t k) const {
  LinearizedRow row;
  if (class_[k] == NodeClass::interior) {
    const NodeInfo& ni = grid_.info(k);
    const std::size_t e = ni.edge;
    const double h = grid_.spacing(e);
    const double a = diff_[k], th = theta_[e];
    const double pm = (u[k] - u[left_[k]]) / h, pp = (u[right_[k]] - u[k]) / h;
    const double hp = problem_->edges[e].hamiltonian.dp(ni.t, 0.5 * (pm + pp));
    row.value = interior_residual(u, k) - (offset_.empty() ? 0.0 : offset_[k]);
    row.entries = {{k, problem_->lambda + 2.0 * a / (h * h) + th / h},
                   {left_[k], -a / (h * h) - hp / (2.0 * h) - th / (2.0 * h)},
                   {right_[k], -a / (h * h) + hp / (2.0 * h) - th / (2.0 * h)}};
    return row;
  }
  Eval ev = class_[k] == NodeClass::junction ? eval_junction(u, k) : eval_boundary(u, k);
  row.value = ev.value - (offset_.empty() ? 0.0 : offset_[k]);
  row.entries.push_back({k, ev.d_own});
  const auto& arms = arms_[k];
  for (std::size_t i = 0; i < arms.size(); ++i) row.entries.push_back({arms[i].neighbor, ev.d_arm[i]});
  return row;
}

ProbeReport ResidualSystem::probe_monotonicity(std::size_t samples, std::uint64_t seed, double step) const {
  ProbeReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const std::size_t n = size();
  GridFunction u(n);
  for (std::size_t s = 0; s < samples; ++s) {
    const double amp = std::pow(10.0, 2.0 * U(rng));
    const double freq = 1.0 + 8.0 * std::abs(U(rng));
    const double phase = 3.0 * U(rng);
    const bool rough = s % 2 == 0;
    for (std::size_t k = 0; k < n; ++k) {
      const NodeInfo& ni = grid_.info(k);
      double smooth = amp * std::sin(freq * (ni.t + static_cast<double>(ni.edge)) + phase);
      u[k] = rough ? amp * U(rng) : smooth + 0.01 * amp * U(rng);
    }
    for (std::size_t k = 0; k < n; ++k) {
      LinearizedRow row = linearize(u, k);
      double scale = 1.0;
      for (const auto& en : row.entries) scale += std::abs(en.value);
      double umax = 1.0;
      for (std::size_t j : stencil(k)) umax = std::max(umax, std::abs(u[j]));
      const double tol = 1e-7 * scale * umax;
      const double r0 = residual_at(u, k);
      for (std::size_t j : stencil(k)) {
        const double keep = u[j];
        u[j] = keep + step;
        const double r1 = residual_at(u, k);
        u[j] = keep;
        const double slope = (r1 - r0) / step;
        ++rep.checks;
        bool bad = false;
        int dir = 1;
        if (j == k) {
          double least = 0.0;
          if (class_[k] == NodeClass::interior || class_[k] == NodeClass::boundary_strong)
            least = std::min(problem_->lambda, 1.0) - 1e-10;
          bad = slope < least - tol;
          dir = -1;
        } else {
          bad = slope > tol;
        }
        if (bad) {
          rep.passed = false;
          rep.witness = ProbeWitness{k, j, dir, slope};
          return rep;
        }
      }
    }
  }
  return rep;
}

ResidualSystem assemble(std::shared_ptr<const NetworkProblem> problem, const Grid& grid, const SchemeOptions& options) {
  ResidualSystem sys(std::move(problem), grid, options);
  if (options.probe_samples > 0) {
    ProbeReport rep = sys.probe_monotonicity(options.probe_samples, options.probe_seed);
    if (!rep.passed) {
      const auto& w = *rep.witness;
      throw Error(ErrorCode::MonotonicityProbeFailed,
                  "node " + std::to_string(w.node) + (w.direction > 0 ? " increases with node " : " decreases with own value at node ") +
                      std::to_string(w.perturbed) + " (slope " + std::to_string(w.slope) + ")");
    }
  }
  return sys;
}

}  // namespace knet
