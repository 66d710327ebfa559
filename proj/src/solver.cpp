#include "knet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace knet {

const char* to_string(Method m) {
  switch (m) {
    case Method::sweep: return "sweep";
    case Method::newton: return "newton";
    case Method::hybrid: return "hybrid";
  }
  return "hybrid";
}

Method method_from_string(const std::string& s) {
  if (s == "sweep") return Method::sweep;
  if (s == "newton") return Method::newton;
  if (s == "hybrid") return Method::hybrid;
  throw Error(ErrorCode::MalformedInput, "unknown method '" + s + "'");
}

nlohmann::json SolveConfig::to_json() const {
  return {{"tolerance", tolerance},
          {"max_sweeps", max_sweeps},
          {"max_newton_steps", max_newton_steps},
          {"method", to_string(method)},
          {"node_tolerance", node_tolerance}};
}

namespace {

// Profile with unit inward slope -1/l_E at both ends of every edge, zero at vertices.
double graph_profile(double s) {
  if (s <= 0.125) return s;
  if (s >= 0.875) return 1.0 - s;
  const double L = 0.75;
  const double t = (s - 0.125) / L;
  const double t3 = t * t * t, t4 = t3 * t, t5 = t4 * t;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  return 0.125 + L * (h1 - h4);
}

bool is_star(const Network& net, std::size_t& center) {
  auto interior = net.interior_vertices();
  if (interior.size() != 1) return false;
  center = interior.front();
  return net.degree(center) == net.edge_count();
}

struct Shape {
  GridFunction psi;
  std::string name;
};

Shape barrier_shape(const ResidualSystem& sys) {
  const Grid& g = sys.grid();
  const Network& net = g.network();
  std::size_t center = 0;
  if (is_star(net, center)) {
    return {g.sample([&](std::size_t e, double t) { return -inward_coordinate(net, center, e, t); }), "star-affine"};
  }
  return {g.sample([&](std::size_t e, double t) {
            const double len = net.edge(e).length;
            return -graph_profile(t / len);
          }),
          "graph-profile"};
}

GridFunction combine(double a, double s, const GridFunction& psi) {
  GridFunction u(psi.size());
  for (std::size_t k = 0; k < psi.size(); ++k) u[k] = a + s * psi[k];
  return u;
}

bool all_signed(const ResidualSystem& sys, const GridFunction& u, double sign, const std::vector<std::size_t>& nodes) {
  for (std::size_t k : nodes)
    if (!(sign * sys.residual_at(u, k) >= 0.0)) return false;
  return true;
}

}  // namespace

Barriers build_barriers(const ResidualSystem& sys) {
  const NetworkProblem& pb = sys.problem();
  const Network& net = sys.grid().network();
  for (std::size_t v : net.interior_vertices())
    if (!pb.kirchhoff_at(v).existence_coercive)
      throw Error(ErrorCode::BarrierConstructionFailed,
                  "Kirchhoff condition at vertex " + std::to_string(net.vertex(v).id) + " lacks the existence coercivity");

  Shape shape = barrier_shape(sys);
  const std::vector<std::size_t> junctions = net.interior_vertices();
  std::vector<std::size_t> all(sys.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;

  // Slope: junction residuals of +S psi must be >= 0 and of -S psi <= 0 with the level at zero.
  double S = 1.0;
  bool found = junctions.empty();
  for (int it = 0; it < 80 && !found; ++it) {
    if (all_signed(sys, combine(0.0, S, shape.psi), 1.0, junctions) &&
        all_signed(sys, combine(0.0, -S, shape.psi), -1.0, junctions)) {
      found = true;
      break;
    }
    S *= 2.0;
  }
  if (!found) throw Error(ErrorCode::BarrierConstructionFailed, "no junction slope makes the profile a barrier");

  auto ok = [&](double A) {
    return all_signed(sys, combine(A, S, shape.psi), 1.0, all) && all_signed(sys, combine(-A, -S, shape.psi), -1.0, all);
  };
  double psi_max = sup_norm(shape.psi);
  double hi = std::max(1.0, S * psi_max);
  int it = 0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (++it > 200) throw Error(ErrorCode::BarrierConstructionFailed, "no barrier level found");
  }
  double lo = S * psi_max;
  if (!ok(lo)) {
    for (int b = 0; b < 40; ++b) {
      double mid = 0.5 * (lo + hi);
      if (ok(mid))
        hi = mid;
      else
        lo = mid;
    }
  } else {
    hi = lo;
  }
  Barriers bar;
  bar.upper = combine(hi, S, shape.psi);
  bar.lower = combine(-hi, -S, shape.psi);
  bar.construction = shape.name;
  bar.level = hi;
  bar.slope = S;
  return bar;
}

namespace {

class Sweeper {
 public:
  Sweeper(const ResidualSystem& sys, const SolveConfig& cfg, const Barriers* bar) : sys_(sys), cfg_(cfg), bar_(bar) {}

  void pass(GridFunction& u, bool forward) {
    const std::size_t n = sys_.size();
    for (std::size_t i = 0; i < n; ++i) relax(u, forward ? i : n - 1 - i);
  }

  std::size_t violations(const GridFunction& u) const {
    if (!bar_) return 0;
    std::size_t c = 0;
    for (std::size_t k = 0; k < u.size(); ++k)
      if (u[k] < bar_->lower[k] - 1e-12 * (1 + std::abs(bar_->lower[k])) ||
          u[k] > bar_->upper[k] + 1e-12 * (1 + std::abs(bar_->upper[k])))
        ++c;
    return c;
  }

 private:
  double eval(GridFunction& u, std::size_t k, double x) const {
    u[k] = x;
    return sys_.residual_at(u, k);
  }

  void relax(GridFunction& u, std::size_t k) {
    const double x0 = u[k];
    const double f0 = sys_.residual_at(u, k);
    if (f0 == 0.0) return;
    double lo, hi, flo, fhi;
    bool have = false;
    if (bar_) {
      lo = std::min(bar_->lower[k], x0);
      hi = std::max(bar_->upper[k], x0);
      flo = eval(u, k, lo);
      fhi = eval(u, k, hi);
      have = flo <= 0.0 && fhi >= 0.0;
    }
    if (!have) {
      double slope = sys_.linearize(u, k).own_slope();
      u[k] = x0;
      double w = std::abs(f0) / std::max(slope, 1e-300) * 1.5 + 1e-12 * (1 + std::abs(x0));
      if (!std::isfinite(w)) w = 1.0 + std::abs(x0);
      if (f0 > 0) {
        hi = x0;
        fhi = f0;
        lo = x0 - w;
        flo = eval(u, k, lo);
        for (int it = 0; flo > 0.0; ++it) {
          if (it > 200) throw Error(ErrorCode::LocalRootBracketFailed, "node " + std::to_string(k));
          w *= 2.0;
          lo = x0 - w;
          flo = eval(u, k, lo);
        }
      } else {
        lo = x0;
        flo = f0;
        hi = x0 + w;
        fhi = eval(u, k, hi);
        for (int it = 0; fhi < 0.0; ++it) {
          if (it > 200) throw Error(ErrorCode::LocalRootBracketFailed, "node " + std::to_string(k));
          w *= 2.0;
          hi = x0 + w;
          fhi = eval(u, k, hi);
        }
      }
    }
    if (flo == 0.0) {
      u[k] = lo;
      return;
    }
    if (fhi == 0.0) {
      u[k] = hi;
      return;
    }
    // Safeguarded Newton inside the bracket.
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < 200; ++it) {
      u[k] = x;
      LinearizedRow row = sys_.linearize(u, k);
      const double fx = row.value;
      if (fx == 0.0) break;
      if (fx > 0)
        hi = x;
      else
        lo = x;
      const double slope = row.own_slope();
      double xn = slope > 0 ? x - fx / slope : 0.5 * (lo + hi);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      const double tol = cfg_.node_tolerance * (1.0 + std::abs(x));
      if (std::abs(xn - x) <= tol || hi - lo <= tol) {
        x = xn;
        break;
      }
      x = xn;
    }
    u[k] = x;
  }

  const ResidualSystem& sys_;
  const SolveConfig& cfg_;
  const Barriers* bar_;
};

void check_config(const SolveConfig& cfg, const GridFunction& initial, const ResidualSystem& sys) {
  if (!(cfg.tolerance > 0.0) || cfg.max_sweeps < 1)
    throw Error(ErrorCode::MalformedInput, "solver tolerance must be positive and max sweeps at least 1");
  if (initial.size() != sys.size() || !is_finite(initial))
    throw Error(ErrorCode::MalformedInput, "initial grid function has the wrong size or non-finite values");
}

}  // namespace

SolveResult sweep_solve(const ResidualSystem& sys, const SolveConfig& cfg, const GridFunction& initial,
                        const Barriers* barriers) {
  check_config(cfg, initial, sys);
  Sweeper sw(sys, cfg, barriers);
  SolveResult res;
  res.solution = initial;
  res.residual_norm = sys.residual_norm(res.solution);
  if (cfg.record_history) res.history.push_back(res.residual_norm);
  while (res.residual_norm > cfg.tolerance && res.sweeps < cfg.max_sweeps) {
    sw.pass(res.solution, true);
    sw.pass(res.solution, false);
    ++res.sweeps;
    res.bracket_violations += sw.violations(res.solution);
    res.residual_norm = sys.residual_norm(res.solution);
    if (cfg.record_history) res.history.push_back(res.residual_norm);
  }
  res.iterations = res.sweeps;
  res.converged = res.residual_norm <= cfg.tolerance;
  if (!res.converged) res.status = ErrorCode::MaxSweepsExceeded;
  return res;
}

SolveResult newton_solve(const ResidualSystem& sys, const SolveConfig& cfg, const GridFunction& initial,
                         const Barriers* barriers) {
  check_config(cfg, initial, sys);
  const bool hybrid = cfg.method != Method::newton;
  const std::size_t n = sys.size();
  Sweeper sw(sys, cfg, barriers);
  SolveResult res;
  res.solution = initial;
  GridFunction r = sys.residual(res.solution);
  res.residual_norm = sup_norm(r);
  if (cfg.record_history) res.history.push_back(res.residual_norm);

  Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  std::size_t stalls = 0;

  auto do_sweep = [&]() {
    sw.pass(res.solution, true);
    sw.pass(res.solution, false);
    ++res.sweeps;
    res.bracket_violations += sw.violations(res.solution);
    r = sys.residual(res.solution);
    res.residual_norm = sup_norm(r);
  };

  while (res.residual_norm > cfg.tolerance) {
    if (res.newton_steps >= cfg.max_newton_steps || res.sweeps >= cfg.max_sweeps) break;
    trip.clear();
    for (std::size_t k = 0; k < n; ++k) {
      LinearizedRow row = sys.linearize(res.solution, k);
      for (const auto& en : row.entries)
        trip.emplace_back(static_cast<int>(k), static_cast<int>(en.node), en.value);
      rhs[static_cast<Eigen::Index>(k)] = -r[k];
    }
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(J);
    bool stepped = false;
    if (lu.info() != Eigen::Success) {
      if (!hybrid) throw Error(ErrorCode::SingularLinearization, "Jacobian factorization failed");
    } else {
      Eigen::VectorXd d = lu.solve(rhs);
      ++res.newton_steps;
      if (lu.info() == Eigen::Success && d.allFinite()) {
        double alpha = 1.0;
        GridFunction trial(n);
        for (std::size_t b = 0; b <= cfg.max_backtracks; ++b) {
          for (std::size_t k = 0; k < n; ++k) trial[k] = res.solution[k] + alpha * d[static_cast<Eigen::Index>(k)];
          GridFunction rt = sys.residual(trial);
          double nt = sup_norm(rt);
          if (nt <= (1.0 - cfg.armijo * alpha) * res.residual_norm) {
            res.solution.swap(trial);
            r.swap(rt);
            res.residual_norm = nt;
            stepped = true;
            break;
          }
          alpha *= 0.5;
        }
      } else if (!hybrid) {
        throw Error(ErrorCode::SingularLinearization, "Newton direction is not finite");
      }
    }
    if (!stepped) {
      if (hybrid) {
        do_sweep();
      } else if (++stalls > 5) {
        break;
      }
    }
    if (cfg.record_history) res.history.push_back(res.residual_norm);
  }
  res.iterations = res.newton_steps + res.sweeps;
  res.converged = res.residual_norm <= cfg.tolerance;
  if (!res.converged) res.status = ErrorCode::MaxSweepsExceeded;
  return res;
}

SolveResult solve(const ResidualSystem& sys, const SolveConfig& cfg, const GridFunction& initial,
                  const Barriers* barriers) {
  if (cfg.method == Method::sweep) return sweep_solve(sys, cfg, initial, barriers);
  return newton_solve(sys, cfg, initial, barriers);
}

SolveResult solve(const ResidualSystem& sys, const SolveConfig& cfg) {
  Barriers bar = build_barriers(sys);
  GridFunction mid(sys.size());
  for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (bar.lower[k] + bar.upper[k]);
  return solve(sys, cfg, mid, &bar);
}

std::vector<double> geometric_schedule(double start, double ratio, std::size_t count) {
  if (!(start > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1)
    throw Error(ErrorCode::MalformedInput, "epsilon schedule needs start > 0, 0 < ratio < 1, count >= 1");
  std::vector<double> s;
  double e = start;
  for (std::size_t k = 0; k < count; ++k, e *= ratio) s.push_back(e);
  return s;
}

VanishingViscosityReport vanishing_viscosity(std::shared_ptr<const NetworkProblem> problem, const Grid& grid,
                                             const std::vector<double>& schedule, const SolveConfig& config,
                                             const SchemeOptions& base) {
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw Error(ErrorCode::MalformedInput, "epsilon schedule entries must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1]))
      throw Error(ErrorCode::MalformedInput, "epsilon schedule must be strictly decreasing");
  }
  VanishingViscosityReport rep;
  const double lmin = grid.network().min_length();
  rep.deltas = {0.05 * lmin, 0.1 * lmin, 0.2 * lmin};
  rep.boundary_vertices = grid.network().boundary_vertices();
  std::vector<std::vector<bool>> masks;
  for (double d : rep.deltas) masks.push_back(grid.interior_mask(d));

  SchemeOptions limit_opts = base;
  limit_opts.epsilon = 0.0;
  ResidualSystem limit_sys = assemble(problem, grid, limit_opts);
  rep.limit = solve(limit_sys, config);
  if (!rep.limit.converged)
    throw Error(ErrorCode::MaxSweepsExceeded, "degenerate limit solve did not converge");

  GridFunction warm;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    SchemeOptions opts = base;
    opts.epsilon = schedule[k];
    opts.boundary = BoundaryMode::strong;
    ResidualSystem sys = assemble(problem, grid, opts);
    EpsilonRun run;
    run.epsilon = schedule[k];
    if (warm.empty()) {
      run.result = solve(sys, config);
    } else {
      run.result = solve(sys, config, warm);
    }
    if (!run.result.converged)
      throw Error(ErrorCode::MaxSweepsExceeded, "epsilon = " + std::to_string(schedule[k]) + " solve did not converge");
    for (std::size_t d = 0; d < masks.size(); ++d) {
      run.to_limit.push_back(sup_difference(run.result.solution, rep.limit.solution, masks[d]));
      run.cauchy.push_back(warm.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : sup_difference(run.result.solution, warm, masks[d]));
    }
    for (std::size_t v : rep.boundary_vertices)
      run.boundary_gap.push_back(std::abs(run.result.solution[v] - rep.limit.solution[v]));
    warm = run.result.solution;
    rep.runs.push_back(std::move(run));
  }
  return rep;
}

nlohmann::json VanishingViscosityReport::to_json() const {
  nlohmann::json j;
  j["deltas"] = deltas;
  j["limit"] = {{"converged", limit.converged}, {"residual", limit.residual_norm}, {"iterations", limit.iterations}};
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json c = nlohmann::json::array();
    for (double x : r.cauchy) c.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
    j["runs"].push_back({{"epsilon", r.epsilon},
                         {"converged", r.result.converged},
                         {"iterations", r.result.iterations},
                         {"residual", r.result.residual_norm},
                         {"cauchy", c},
                         {"to_limit", r.to_limit},
                         {"boundary_gap", r.boundary_gap}});
  }
  return j;
}

}  // namespace knet
