#include <catch_amalgamated.hpp>

#include <cmath>

#include "knet/analysis.hpp"
#include "knet/catalog.hpp"
#include "knet/errors.hpp"
#include "knet/solver.hpp"
#include "helpers.hpp"

using namespace knet;
using Catch::Matchers::WithinAbs;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

// distance to the center of a star, measured along the node's edge
GridFunction star_sample(const Grid& g, const std::function<double(double)>& f) {
  return g.sample([&](std::size_t, double t) { return f(t); });
}

GridFunction solved(const CatalogEntry& c, const Grid& g, const SchemeOptions& opts) {
  SolveResult r = solve(assemble(c.problem, g, opts), SolveConfig{});
  REQUIRE(r.converged);
  return r.solution;
}

}  // namespace

TEST_CASE("slope estimator on simple data") {
  auto net = test::net_of(star_doc({1.0, 1.0, 1.0}));
  Grid g = Grid::with_spacing(net, 0.01);
  JunctionSlopes cone = estimate_junction_slopes(g, star_sample(g, [](double r) { return 1.0 - r; }), 0, 4);
  REQUIRE(cone.edges.size() == 3);
  for (const auto& es : cone.edges) {
    CHECK_THAT(es.upper, WithinAbs(-1.0, 1e-12));
    CHECK_THAT(es.lower, WithinAbs(-1.0, 1e-12));
    CHECK_THAT(es.fit, WithinAbs(-1.0, 1e-12));
  }
  JunctionSlopes flat = estimate_junction_slopes(g, g.constant(3.0), 0, 4);
  for (const auto& es : flat.edges) {
    CHECK(es.upper == 0.0);
    CHECK(es.lower == 0.0);
  }
  CHECK(code_of([&] { estimate_junction_slopes(g, g.constant(0.0), 0, 1); }) == ErrorCode::WindowTooLarge);
  CHECK(code_of([&] { estimate_junction_slopes(g, g.constant(0.0), 0, 40); }) == ErrorCode::WindowTooLarge);
  CHECK(code_of([&] { estimate_junction_slopes(g, g.constant(0.0), 1, 4); }) == ErrorCode::VertexNotInterior);
  CHECK(default_window(g, 0) == 4);
}

TEST_CASE("slope estimator sees the oscillation of r sin(log r)") {
  auto net = test::net_of(star_doc({1.0, 1.0}));
  Grid g = Grid::with_spacing(net, 1.0 / 2000.0);
  GridFunction u = star_sample(g, [](double r) { return r > 0.0 ? r * std::sin(std::log(r)) : 0.0; });
  JunctionSlopes js = estimate_junction_slopes(g, u, 0, 400);
  // the divided differences are sin(log r) for r in [h, 400 h]
  double hi = -2.0, lo = 2.0;
  for (std::size_t m = 1; m <= 400; ++m) {
    double r = m / 2000.0;
    hi = std::max(hi, std::sin(std::log(r)));
    lo = std::min(lo, std::sin(std::log(r)));
  }
  for (const auto& es : js.edges) {
    CHECK_THAT(es.upper, WithinAbs(hi, 1e-12));
    CHECK_THAT(es.lower, WithinAbs(lo, 1e-12));
    CHECK(es.upper > 0.95);
    CHECK(es.lower < -0.95);
  }
}

TEST_CASE("slope estimator converges on smooth data") {
  auto net = test::net_of(star_doc({1.0, 1.0}));
  std::vector<double> errs;
  for (double h : {0.02, 0.01, 0.005}) {
    Grid g = Grid::with_spacing(net, h);
    GridFunction u = star_sample(g, [](double r) { return 2.0 * r + 3.0 * r * r; });
    JunctionSlopes js = estimate_junction_slopes(g, u, 0, 4);
    errs.push_back(std::max(std::abs(js.edges[0].upper - 2.0), std::abs(js.edges[0].lower - 2.0)));
  }
  CHECK_THAT(errs[0] / errs[1], WithinAbs(2.0, 1e-9));
  CHECK_THAT(errs[1] / errs[2], WithinAbs(2.0, 1e-9));
}

TEST_CASE("degenerate edge inequalities") {
  SECTION("constant solution is an equality case") {
    CatalogEntry c = catalog_entry("star_constant");
    Grid g = Grid::with_spacing(c.network, 0.02);
    GridFunction u = g.constant(1.0);
    JunctionSlopes js = estimate_junction_slopes(g, u, 0, default_window(g, 0));
    auto checks = check_degenerate_edge_inequalities(*c.problem, g, u, 0, js, 1e-12);
    REQUIRE(checks.size() == 2);  // two degenerate edges, zero spread: no supersolution check
    for (const auto& ch : checks) {
      CHECK(ch.verdict == "PASS");
      CHECK(ch.witness["value"].get<double>() == 0.0);
    }
  }
  SECTION("a bump at the junction fails with a witness slope") {
    CatalogEntry c = catalog_entry("star_constant");
    Grid g = Grid::with_spacing(c.network, 0.02);
    GridFunction u = g.constant(1.0);
    u[0] += 0.5;
    JunctionSlopes js = estimate_junction_slopes(g, u, 0, default_window(g, 0));
    auto checks = check_degenerate_edge_inequalities(*c.problem, g, u, 0, js, 0.1);
    bool failed = false;
    for (const auto& ch : checks)
      if (ch.name == "degenerate_subsolution" && ch.failed()) {
        failed = true;
        CHECK(ch.witness.contains("p"));
        CHECK(ch.witness["p"].get<double>() < -5.0);
      }
    CHECK(failed);
  }
  SECTION("junction with vanishing diffusion at the vertex only") {
    CatalogEntry c = catalog_entry("degenerate_junction");
    for (double h : {0.02, 0.01}) {
      Grid g = Grid::with_spacing(c.network, h);
      GridFunction u = solved(c, g, c.scheme);
      JunctionSlopes js = estimate_junction_slopes(g, u, 0, default_window(g, 0));
      for (const auto& ch : check_degenerate_edge_inequalities(*c.problem, g, u, 0, js, 5.0 * h))
        if (ch.name == "degenerate_subsolution") CHECK(ch.verdict == "PASS");
    }
  }
}

// The first cell slope is pinned by the affine junction condition while the interior slope is
// about -0.33, so the window spread is a grid artifact and the supersolution side misses by ~0.25.
TEST_CASE("degenerate junction supersolution inequality on the slope window", "[!shouldfail]") {
  CatalogEntry c = catalog_entry("degenerate_junction");
  for (double h : {0.02, 0.01}) {
    Grid g = Grid::with_spacing(c.network, h);
    GridFunction u = solved(c, g, c.scheme);
    JunctionSlopes js = estimate_junction_slopes(g, u, 0, default_window(g, 0));
    for (const auto& ch : check_degenerate_edge_inequalities(*c.problem, g, u, 0, js, 5.0 * h))
      if (ch.name != "degenerate_subsolution") CHECK(ch.verdict == "PASS");
  }
}

// Known deviation: on the asymmetric star the kirchhoff-mode junction value is pulled up and the
// first-cell slope on the shortest edge is roughly twice the limit slope.  Tracked in the
// acceptance run; kept here so a fix shows up as an unexpected pass.
TEST_CASE("eikonal star satisfies the degenerate inequalities at the junction", "[!shouldfail]") {
  CatalogEntry c = catalog_entry("eikonal_star");
  for (double h : {0.02, 0.01}) {
    Grid g = Grid::with_spacing(c.network, h);
    GridFunction u = solved(c, g, c.scheme);
    JunctionSlopes js = estimate_junction_slopes(g, u, 0, default_window(g, 0));
    for (const auto& ch : check_degenerate_edge_inequalities(*c.problem, g, u, 0, js, 5.0 * h))
      CHECK(ch.verdict == "PASS");
  }
}

TEST_CASE("probe functions") {
  auto net = test::net_of(star_doc({1.0, 1.0, 1.0}));
  CHECK_THROWS_AS(ProbeFunction(net->vertex_point(0), 0.0, 1.0, Side::sub), Error);
  CHECK_THROWS_AS(ProbeFunction(net->vertex_point(0), 1.0, -1.0, Side::sub), Error);
  Grid g = Grid::with_spacing(net, 0.001);
  for (double L : {1.0, 8.0, 64.0})
    for (double K : {1.0, 4.0, 16.0}) {
      ProbeFunction psi(net->point(1, 0.5), L, K, Side::sub);
      const double r = psi.radius();
      CHECK(psi.curvature() == -2.0 * L * K);
      for (std::size_t j = 0; j + 1 < g.nodes_on_edge(1); ++j) {
        const double t0 = j * g.spacing(1), t1 = t0 + g.spacing(1);
        if (std::abs(t0 - 0.5) > r || std::abs(t1 - 0.5) > r) continue;
        if ((t0 - 0.5) * (t1 - 0.5) < 0.0) continue;
        const double d = std::abs(psi(*net, net->point(1, t1)) - psi(*net, net->point(1, t0))) / g.spacing(1);
        CHECK(d >= 0.5 * L * (1.0 - 1e-9));
        CHECK(d <= L * (1.0 + 1e-9) + L * K * g.spacing(1));
      }
    }
}

TEST_CASE("viscosity probes at vertices") {
  SECTION("constant at a classical junction") {
    CatalogEntry c = catalog_entry("star_constant");
    Grid g = Grid::with_spacing(c.network, 0.01);
    GridFunction u = g.constant(1.0);
    ProbeGrid pg{{1.0}, {1.0}};
    Check sub = probe_viscosity(*c.problem, g, u, 0, pg, Side::sub, 1e-9);
    CHECK(sub.verdict == "PASS");
    CHECK_THAT(sub.witness["kirchhoff"].get<double>(), WithinAbs(-3.0, 1e-15));
  }
  SECTION("attained strong Dirichlet datum") {
    CatalogEntry c = catalog_entry("linear_2edge");
    Grid g = Grid::with_spacing(c.network, 0.01);
    GridFunction u = solved(c, g, c.scheme);
    for (std::size_t v : c.network->boundary_vertices())
      for (Side s : {Side::sub, Side::super}) {
        Check ch = probe_viscosity(*c.problem, g, u, v, ProbeGrid::standard(), s, 0.05);
        CHECK(ch.verdict != "FAIL");
      }
  }
  SECTION("computed solutions pass at the junction") {
    for (const char* name : {"degenerate_junction", "eikonal_star_viscous", "linear_3edge"}) {
      CatalogEntry c = catalog_entry(name);
      Grid g = Grid::with_spacing(c.network, 0.01);
      GridFunction u = solved(c, g, c.scheme);
      for (Side s : {Side::sub, Side::super})
        CHECK(probe_viscosity(*c.problem, g, u, 0, ProbeGrid::standard(), s, 0.05).verdict != "FAIL");
    }
  }
  SECTION("no probe touches a sharp minimum from above") {
    auto net = test::net_of(star_doc({1.0, 1.0}));
    auto pb = test::problem_of(test::eikonal_problem(0.0, 0.0), net);
    Grid g = Grid::with_spacing(net, 0.01);
    GridFunction u = star_sample(g, [](double r) { return 5000.0 * r; });
    CHECK(probe_viscosity(*pb, g, u, 0, ProbeGrid::standard(), Side::sub, 0.05).verdict == "NO_ACTIVE");
  }
}

TEST_CASE("interior Lipschitz constants") {
  auto net = test::net_of(star_doc({1.0, 1.0, 1.0}));
  Grid g = Grid::with_spacing(net, 0.01);
  CHECK_THAT(lipschitz_on_interior(g, star_sample(g, [](double r) { return 1.0 - r; }), 0.1), WithinAbs(1.0, 1e-12));
  CHECK(lipschitz_on_interior(g, g.constant(2.0), 0.1) == 0.0);
  CHECK(code_of([&] { lipschitz_on_interior(g, g.constant(2.0), 0.6); }) == ErrorCode::MalformedInput);
  auto single = test::net_of({{"vertices", {{{"id", 0}}, {{"id", 1}}}},
                              {"edges", {{{"id", 0}, {"from", 0}, {"to", 1}, {"length", 1.0}}}}});
  Grid coarse = Grid::uniform(single, 3);
  CHECK(code_of([&] { lipschitz_on_interior(coarse, coarse.constant(0.0), 0.45); }) == ErrorCode::EmptyInteriorSet);

  CatalogEntry c = catalog_entry("eikonal_star");
  std::vector<double> L;
  for (double h : {0.02, 0.01, 0.005}) {
    Grid gh = Grid::with_spacing(c.network, h);
    L.push_back(lipschitz_on_interior(gh, solved(c, gh, c.scheme), 0.1 * c.network->min_length()));
  }
  const double hi = *std::max_element(L.begin(), L.end()), lo = *std::min_element(L.begin(), L.end());
  CHECK((hi - lo) / hi <= 0.05);
}

TEST_CASE("boundary loss report") {
  SECTION("elliptic strong data is attained") {
    CatalogEntry c = catalog_entry("linear_3edge");
    Grid g = Grid::with_spacing(c.network, 0.02);
    for (const auto& b : boundary_loss_report(*c.problem, g, solved(c, g, c.scheme), 1e-8)) CHECK(b.status == "attained");
  }
  SECTION("large data on a degenerate eikonal is lost") {
    CatalogEntry c = catalog_entry("loss_star");
    Grid g = Grid::with_spacing(c.network, 0.01);
    for (const auto& b : boundary_loss_report(*c.problem, g, solved(c, g, c.scheme), 1e-8)) {
      CHECK(b.status == "lost");
      CHECK_THAT(b.value, WithinAbs(1.0, 0.05));
      CHECK(b.prop_applies);
    }
  }
  SECTION("zero data on a degenerate eikonal is attained") {
    CatalogEntry c = catalog_entry("eikonal_star");
    Grid g = Grid::with_spacing(c.network, 0.01);
    for (const auto& b : boundary_loss_report(*c.problem, g, solved(c, g, c.scheme), 1e-8)) CHECK(b.status == "attained");
  }
  SECTION("overshoot is flagged") {
    CatalogEntry c = catalog_entry("eikonal_star");
    Grid g = Grid::with_spacing(c.network, 0.01);
    GridFunction u = solved(c, g, c.scheme);
    u[1] = 0.3;
    auto rep = boundary_loss_report(*c.problem, g, u, 1e-8);
    CHECK(rep[0].status == "overshoot");
  }
}

TEST_CASE("verify_solution on computed and corrupted solutions") {
  CatalogEntry c = catalog_entry("degenerate_junction");
  Grid g = Grid::with_spacing(c.network, 0.02);
  GridFunction u = solved(c, g, c.scheme);
  VerifyOptions opts;
  opts.scheme = c.scheme;
  DiagnosticsReport good = verify_solution(c.problem, g, u, opts);
  CHECK(good.passed());
  CHECK(good.lipschitz.size() == 3);
  nlohmann::json j = good.to_json(*c.network);
  CHECK(j.contains("checks"));

  GridFunction bad = u;
  bad[0] += 0.3;
  DiagnosticsReport rep = verify_solution(c.problem, g, bad, opts);
  CHECK_FALSE(rep.passed());
  CHECK(rep.failures() > 0);
  for (const auto& ch : rep.checks)
    if (ch.failed()) CHECK_FALSE(ch.witness.is_null());
}
