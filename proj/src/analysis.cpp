#include "knet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "knet/errors.hpp"
#include "knet/solver.hpp"

namespace knet {

const char* to_string(Side s) { return s == Side::sub ? "sub" : "super"; }

nlohmann::json Check::to_json() const {
  return {{"name", name},       {"location", location}, {"margin", margin},
          {"tolerance", tolerance}, {"verdict", verdict},   {"witness", witness}};
}

Check make_check(std::string name, std::string location, double margin, double tolerance, nlohmann::json witness) {
  Check c{std::move(name), std::move(location), margin, tolerance, "PASS", std::move(witness)};
  if (!(margin >= -tolerance)) c.verdict = "FAIL";
  return c;
}

namespace {

std::string vertex_label(const Network& net, std::size_t v) { return "vertex " + std::to_string(net.vertex(v).id); }

std::string node_label(const Grid& g, std::size_t k) {
  const NodeInfo& ni = g.info(k);
  if (ni.is_vertex) return vertex_label(g.network(), ni.vertex);
  std::ostringstream s;
  s << "edge " << g.network().edge(ni.edge).id << " t=" << ni.t;
  return s.str();
}

// Node at distance m cells from vertex v along incidence inc.
std::size_t along(const Grid& g, const Incidence& inc, std::size_t m) {
  const std::size_t n = g.nodes_on_edge(inc.edge);
  return inc.at_start ? g.node(inc.edge, m) : g.node(inc.edge, n - 1 - m);
}

double vertex_t(const Network& net, const Incidence& inc) { return inc.at_start ? 0.0 : net.edge(inc.edge).length; }

}  // namespace

ProbeFunction::ProbeFunction(NetworkPoint c, double l, double k, Side s) : center(c), L(l), K(k), side(s) {
  if (!(L > 0.0) || !(K > 0.0)) throw Error(ErrorCode::MalformedInput, "probe needs L > 0 and K > 0");
}

double ProbeFunction::operator()(const Network& net, const NetworkPoint& x) const {
  const double r = geodesic_distance(net, center, x);
  return L * (r - K * r * r);
}

nlohmann::json JunctionSlopes::to_json(const Network& net) const {
  nlohmann::json j{{"vertex", net.vertex(vertex).id}, {"window", window}, {"edges", nlohmann::json::array()}};
  for (const auto& e : edges)
    j["edges"].push_back({{"edge", net.edge(e.edge).id},
                          {"upper", e.upper},
                          {"lower", e.lower},
                          {"fit", e.fit},
                          {"fit_residual", e.fit_residual}});
  return j;
}

std::size_t default_window(const Grid& grid, std::size_t v) {
  std::size_t w = 4;
  for (const auto& inc : grid.network().incident(v))
    w = std::min(w, static_cast<std::size_t>(0.2 * static_cast<double>(grid.nodes_on_edge(inc.edge))));
  return std::max<std::size_t>(w, 2);
}

JunctionSlopes estimate_junction_slopes(const Grid& grid, const GridFunction& u, std::size_t v, std::size_t window) {
  const Network& net = grid.network();
  if (v >= net.vertex_count() || net.is_boundary(v))
    throw Error(ErrorCode::VertexNotInterior, "junction slopes need an interior vertex");
  if (window < 2) throw Error(ErrorCode::WindowTooLarge, "slope window must hold at least 2 nodes");
  JunctionSlopes out;
  out.vertex = v;
  out.window = window;
  for (const auto& inc : net.incident(v)) {
    const std::size_t n = grid.nodes_on_edge(inc.edge);
    if (static_cast<double>(window) > 0.2 * static_cast<double>(n))
      throw Error(ErrorCode::WindowTooLarge, "window of " + std::to_string(window) + " nodes exceeds 20% of edge " +
                                                 std::to_string(net.edge(inc.edge).id));
    const double h = grid.spacing(inc.edge);
    EdgeSlopes es;
    es.edge = inc.edge;
    es.window = window;
    es.upper = -std::numeric_limits<double>::infinity();
    es.lower = std::numeric_limits<double>::infinity();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t m = 1; m <= window; ++m) {
      const double rho = h * static_cast<double>(m);
      const double du = u[along(grid, inc, m)] - u[v];
      const double q = du / rho;
      es.upper = std::max(es.upper, q);
      es.lower = std::min(es.lower, q);
      sxy += rho * du;
      sxx += rho * rho;
    }
    es.fit = sxy / sxx;
    double ss = 0.0;
    for (std::size_t m = 1; m <= window; ++m) {
      const double rho = h * static_cast<double>(m);
      const double r = u[along(grid, inc, m)] - u[v] - es.fit * rho;
      ss += r * r;
    }
    es.fit_residual = std::sqrt(ss / static_cast<double>(window));
    if (!std::isfinite(es.upper) || !std::isfinite(es.lower))
      throw Error(ErrorCode::MalformedInput, "non-finite values near the junction");
    out.edges.push_back(es);
  }
  return out;
}

std::vector<Check> check_degenerate_edge_inequalities(const NetworkProblem& problem, const Grid& grid,
                                                      const GridFunction& u, std::size_t v,
                                                      const JunctionSlopes& slopes, double tol, std::size_t samples) {
  const Network& net = grid.network();
  const auto D = degenerate_set(problem, v);
  std::vector<Check> out;
  samples = std::max<std::size_t>(samples, 2);
  for (const auto& es : slopes.edges) {
    if (std::find(D.begin(), D.end(), es.edge) == D.end()) continue;
    const std::size_t li = net.local_index(v, es.edge);
    const Incidence& inc = net.incident(v)[li];
    const double s = inc.at_start ? 1.0 : -1.0;
    const double tv = vertex_t(net, inc);
    const Hamiltonian& H = problem.edges[es.edge].hamiltonian;
    const std::string loc = vertex_label(net, v) + " edge " + std::to_string(net.edge(es.edge).id);

    double worst_sub = -std::numeric_limits<double>::infinity(), p_sub = es.lower;
    for (std::size_t j = 0; j < samples; ++j) {
      const double p = es.lower + (es.upper - es.lower) * static_cast<double>(j) / static_cast<double>(samples - 1);
      const double val = problem.lambda * u[v] + H(tv, s * p);
      if (val > worst_sub) {
        worst_sub = val;
        p_sub = p;
      }
    }
    out.push_back(make_check("degenerate_subsolution", loc, -worst_sub, tol,
                             {{"p", p_sub}, {"value", worst_sub}, {"p_lower", es.lower}, {"p_upper", es.upper}}));

    if (es.upper - es.lower > 1e-12) {
      double worst_sup = std::numeric_limits<double>::infinity(), q_sup = es.lower;
      for (std::size_t j = 1; j + 1 <= samples; ++j) {
        const double q = es.lower + (es.upper - es.lower) * static_cast<double>(j) / static_cast<double>(samples);
        const double val = problem.lambda * u[v] + H(tv, s * q);
        if (val < worst_sup) {
          worst_sup = val;
          q_sup = q;
        }
      }
      out.push_back(make_check("degenerate_supersolution", loc, worst_sup, tol,
                               {{"q", q_sup}, {"value", worst_sup}, {"p_lower", es.lower}, {"p_upper", es.upper}}));
    }
  }
  return out;
}

ProbeGrid ProbeGrid::standard() {
  ProbeGrid g;
  for (int k = 0; k <= 10; ++k) g.L.push_back(std::ldexp(1.0, k));
  for (int k = 0; k <= 6; ++k) g.K.push_back(std::ldexp(1.0, k));
  return g;
}

Check probe_viscosity(const NetworkProblem& problem, const Grid& grid, const GridFunction& u, std::size_t k,
                      const ProbeGrid& probes, Side side, double tol, double epsilon) {
  const Network& net = grid.network();
  const NodeInfo& ni = grid.info(k);
  const double sigma = side == Side::sub ? 1.0 : -1.0;
  const double lambda = problem.lambda;
  bool any = false;
  // sub: worst is the largest clause value; super: the smallest
  double worst = side == Side::sub ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  nlohmann::json witness;

  auto consider = [&](double value, double L, double K, const nlohmann::json& extra) {
    any = true;
    const bool worse = side == Side::sub ? value > worst : value < worst;
    if (worse) {
      worst = value;
      witness = {{"L", L}, {"K", K}, {"clause", value}};
      for (const auto& [key, val] : extra.items()) witness[key] = val;
    }
  };

  for (double L : probes.L)
    for (double K : probes.K) {
      ProbeFunction psi(grid.point(k), L, K, side);
      const double r = psi.radius();
      if (ni.is_vertex) {
        const std::size_t v = ni.vertex;
        bool touches = true;
        std::size_t inside = 0;
        for (const auto& inc : net.incident(v)) {
          const double h = grid.spacing(inc.edge);
          const std::size_t n = grid.nodes_on_edge(inc.edge);
          for (std::size_t m = 1; m < n - 1 && h * static_cast<double>(m) <= r; ++m) {
            const double rho = h * static_cast<double>(m);
            const double du = u[along(grid, inc, m)] - u[v];
            const double ps = L * (rho - K * rho * rho);
            ++inside;
            if (side == Side::sub ? du > ps : du < -ps) touches = false;
          }
        }
        if (!touches || inside == 0) continue;
        if (net.is_boundary(v)) {
          const Incidence& inc = net.incident(v).front();
          const double tv = vertex_t(net, inc);
          const double s = inc.at_start ? 1.0 : -1.0;
          const EdgeData& ed = problem.edges[inc.edge];
          const double E = lambda * u[v] - (ed.diffusion.a(tv) + epsilon) * sigma * psi.curvature() +
                           ed.hamiltonian(tv, s * sigma * L);
          const double g = u[v] - problem.dirichlet_at(v);
          consider(side == Side::sub ? std::min(E, g) : std::max(E, g), L, K, {{"equation", E}, {"gap", g}});
        } else {
          const auto& incs = net.incident(v);
          std::vector<double> p(incs.size(), sigma * L);
          double F = problem.kirchhoff_at(v)(u[v], p);
          double clause = F;
          for (const auto& inc : incs) {
            if (problem.edges[inc.edge].diffusion.a(vertex_t(net, inc)) + epsilon != 0.0) continue;
            const double s = inc.at_start ? 1.0 : -1.0;
            const double E = lambda * u[v] + problem.edges[inc.edge].hamiltonian(vertex_t(net, inc), s * sigma * L);
            clause = side == Side::sub ? std::min(clause, E) : std::max(clause, E);
          }
          consider(clause, L, K, {{"kirchhoff", F}});
        }
        continue;
      }
      // interior node: centers a half radius to either side keep psi smooth at the node
      const std::size_t e = ni.edge;
      const double len = net.edge(e).length;
      const double h = grid.spacing(e);
      const std::size_t n = grid.nodes_on_edge(e);
      const double d = 0.5 * r;
      for (double dir : {-1.0, 1.0}) {
        const double ty = ni.t + dir * d;
        if (ty - r < 0.0 || ty + r > len) continue;
        auto psi_at = [&](double t) {
          const double rho = std::abs(t - ty);
          return L * (rho - K * rho * rho);
        };
        const double p0 = psi_at(ni.t);
        bool touches = true;
        std::size_t inside = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const double t = h * static_cast<double>(j);
          if (std::abs(t - ty) > r || j == ni.local) continue;
          ++inside;
          const double du = u[grid.node(e, j)] - u[k];
          const double dp = psi_at(t) - p0;
          if (side == Side::sub ? du > dp : du < -dp) touches = false;
        }
        if (!touches || inside == 0) continue;
        const double slope = -dir * psi.slope(d);  // d psi / dt at the node
        const EdgeData& ed = problem.edges[e];
        const double E = lambda * u[k] - (ed.diffusion.a(ni.t) + epsilon) * sigma * psi.curvature() +
                         ed.hamiltonian(ni.t, sigma * slope);
        consider(E, L, K, {{"center_t", ty}});
      }
    }

  const std::string name = side == Side::sub ? "probe_subsolution" : "probe_supersolution";
  if (!any) {
    Check c{name, node_label(grid, k), 0.0, tol, "NO_ACTIVE", {{"reason", "no probe touches at this node"}}};
    return c;
  }
  return make_check(name, node_label(grid, k), side == Side::sub ? -worst : worst, tol, witness);
}

double lipschitz_on_interior(const Grid& grid, const GridFunction& u, double delta) {
  const Network& net = grid.network();
  if (!(delta > 0.0) || !(delta < 0.5 * net.min_length()))
    throw Error(ErrorCode::MalformedInput, "delta must lie in (0, min length / 2)");
  const auto mask = grid.interior_mask(delta);
  double best = 0.0;
  bool any = false;
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const double h = grid.spacing(e);
    for (std::size_t j = 0; j + 1 < grid.nodes_on_edge(e); ++j) {
      const std::size_t a = grid.node(e, j), b = grid.node(e, j + 1);
      if (!mask[a] || !mask[b]) continue;
      any = true;
      best = std::max(best, std::abs(u[b] - u[a]) / h);
    }
  }
  if (!any) throw Error(ErrorCode::EmptyInteriorSet, "no adjacent node pair lies in the interior set");
  return best;
}

std::vector<BoundaryRecord> boundary_loss_report(const NetworkProblem& problem, const Grid& grid,
                                                 const GridFunction& u, double tol, double epsilon) {
  const Network& net = grid.network();
  std::vector<BoundaryRecord> out;
  for (std::size_t v : net.boundary_vertices()) {
    const Incidence& inc = net.incident(v).front();
    const EdgeData& ed = problem.edges[inc.edge];
    const double tv = vertex_t(net, inc);
    BoundaryRecord rec;
    rec.vertex = v;
    rec.datum = problem.dirichlet_at(v);
    rec.value = u[v];
    rec.gap = rec.datum - rec.value;
    rec.prop_applies = ed.diffusion.a(tv) + epsilon > 0.0 || ed.hamiltonian.coercive;
    if (ed.hamiltonian.coercive || ed.hamiltonian.lower_left_fn) {
      const double delta = (u[along(grid, inc, 1)] - u[v]) / grid.spacing(inc.edge);
      Envelope env = inc.at_start ? ed.hamiltonian.lower_left(tv, delta) : ed.hamiltonian.lower_right(tv, -delta);
      rec.state_constraint = problem.lambda * u[v] + env.value;
    }
    if (std::abs(rec.gap) <= tol)
      rec.status = "attained";
    else if (rec.gap > 0)
      rec.status = "lost";
    else
      rec.status = "overshoot";
    out.push_back(rec);
  }
  return out;
}

bool DiagnosticsReport::passed() const { return failures() == 0; }

std::size_t DiagnosticsReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.failed(); }));
}

nlohmann::json DiagnosticsReport::to_json(const Network& net) const {
  nlohmann::json j;
  j["verdict"] = passed() ? "PASS" : "FAIL";
  j["failures"] = failures();
  j["mesh_size"] = mesh_size;
  j["note"] = "probe verdicts are necessary-condition checks over a finite test-function family";
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) j["checks"].push_back(c.to_json());
  j["junction_slopes"] = nlohmann::json::array();
  for (const auto& s : slopes) j["junction_slopes"].push_back(s.to_json(net));
  j["boundary"] = nlohmann::json::array();
  for (const auto& b : boundary) {
    nlohmann::json r{{"vertex", net.vertex(b.vertex).id}, {"datum", b.datum}, {"value", b.value},
                     {"gap", b.gap},                      {"status", b.status}, {"prop_applies", b.prop_applies}};
    r["state_constraint"] = b.state_constraint ? nlohmann::json(*b.state_constraint) : nlohmann::json(nullptr);
    j["boundary"].push_back(r);
  }
  j["lipschitz"] = nlohmann::json::array();
  for (const auto& [d, l] : lipschitz) j["lipschitz"].push_back({{"delta", d}, {"constant", l}});
  return j;
}

DiagnosticsReport verify_solution(std::shared_ptr<const NetworkProblem> problem, const Grid& grid,
                                  const GridFunction& u, const VerifyOptions& options) {
  if (u.size() != grid.size() || !is_finite(u))
    throw Error(ErrorCode::MalformedInput, "solution has the wrong size or non-finite values");
  const Network& net = grid.network();
  const NetworkProblem& pb = *problem;
  DiagnosticsReport rep;
  rep.mesh_size = grid.mesh_size();
  const double eps = options.scheme.epsilon;

  ResidualSystem sys(problem, grid, options.scheme);
  const GridFunction R = sys.residual(u);
  double worst = 0.0;
  std::size_t at = 0;
  for (std::size_t k = net.vertex_count(); k < grid.size(); ++k)
    if (std::abs(R[k]) > worst) {
      worst = std::abs(R[k]);
      at = k;
    }
  if (grid.size() > net.vertex_count())
    rep.checks.push_back(make_check("interior_equation", node_label(grid, at), -worst, options.residual_tolerance,
                                    {{"residual", R[at]}, {"node", at}}));
  for (std::size_t v = 0; v < net.vertex_count(); ++v)
    rep.checks.push_back(make_check(net.is_boundary(v) ? "boundary_equation" : "junction_equation",
                                    vertex_label(net, v), -std::abs(R[v]), options.residual_tolerance,
                                    {{"residual", R[v]}, {"mode", to_string(sys.node_class(v))}}));

  try {
    Barriers bar = build_barriers(sys);
    double viol = 0.0;
    std::size_t where = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double d = std::max(bar.lower[k] - u[k], u[k] - bar.upper[k]);
      if (d > viol) {
        viol = d;
        where = k;
      }
    }
    rep.checks.push_back(make_check("barrier_bracket", node_label(grid, where), -viol, 1e-12,
                                    {{"construction", bar.construction}, {"level", bar.level}, {"slope", bar.slope}}));
  } catch (const Error& e) {
    rep.checks.push_back({"barrier_bracket", "network", 0.0, 0.0, "SKIPPED", {{"reason", e.what()}}});
  }

  for (std::size_t v : net.interior_vertices()) {
    const std::size_t w = options.window ? *options.window : default_window(grid, v);
    JunctionSlopes js = estimate_junction_slopes(grid, u, v, w);
    double h = 0.0;
    for (const auto& inc : net.incident(v)) h = std::max(h, grid.spacing(inc.edge));
    const double tol = options.slope_constant * (h + static_cast<double>(w) * h);
    bool any_degenerate = false;
    for (const auto& inc : net.incident(v))
      if (pb.edges[inc.edge].diffusion.a(vertex_t(net, inc)) + eps == 0.0) any_degenerate = true;
    if (any_degenerate && eps == 0.0)
      for (auto& c : check_degenerate_edge_inequalities(pb, grid, u, v, js, tol)) rep.checks.push_back(std::move(c));
    rep.slopes.push_back(std::move(js));
  }

  rep.boundary = boundary_loss_report(pb, grid, u, options.boundary_tolerance, eps);
  for (const auto& b : rep.boundary) {
    const bool bad = b.status == "overshoot" && b.prop_applies;
    Check c{"boundary_condition", vertex_label(net, b.vertex), b.gap, options.boundary_tolerance,
            bad ? "FAIL" : "PASS", {{"status", b.status}, {"datum", b.datum}, {"value", b.value}}};
    if (b.state_constraint) c.witness["state_constraint"] = *b.state_constraint;
    rep.checks.push_back(std::move(c));
  }

  for (double f : options.delta_fractions) {
    const double delta = f * net.min_length();
    try {
      const double L = lipschitz_on_interior(grid, u, delta);
      rep.lipschitz.push_back({delta, L});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyInteriorSet && e.code() != ErrorCode::MalformedInput) throw;
      rep.checks.push_back({"lipschitz_interior", "delta=" + std::to_string(delta), 0.0, 0.0, "SKIPPED",
                            {{"reason", e.what()}}});
    }
  }

  if (options.probes) {
    const ProbeGrid pg = ProbeGrid::standard();
    const double tol = options.slope_constant * grid.mesh_size();
    for (std::size_t v = 0; v < net.vertex_count(); ++v)
      for (Side s : {Side::sub, Side::super}) rep.checks.push_back(probe_viscosity(pb, grid, u, v, pg, s, tol, eps));
  }
  return rep;
}

}  // namespace knet
