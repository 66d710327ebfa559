// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "knet/analysis.hpp"
#include "knet/catalog.hpp"
#include "knet/errors.hpp"
#include "knet/oracle.hpp"
#include "knet/solver.hpp"

using namespace knet;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char b[64];
  std::snprintf(b, sizeof b, f, x);
  return b;
}

SolveResult solve_entry(const CatalogEntry& c, const Grid& g, const SchemeOptions& opts, const SolveConfig& cfg = {}) {
  ResidualSystem sys = assemble(c.problem, g, opts);
  SolveResult r = solve(sys, cfg);
  if (!r.converged) throw Error(ErrorCode::MaxSweepsExceeded, c.name + " did not converge");
  return r;
}

Outcome constant_exactness() {
  Outcome o;
  double worst = 0.0;
  for (const char* name : {"star_constant", "graph_constant"}) {
    CatalogEntry c = catalog_entry(name);
    for (double h : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
      Grid g = Grid::with_spacing(c.network, h);
      SolveResult r = solve_entry(c, g, c.scheme);
      double e = sup_difference(r.solution, g.constant(*c.constant));
      worst = std::max(worst, e);
      if (!(e <= 1e-10)) {
        o.pass = false;
        o.detail += std::string(name) + " h=" + fmt("%g", h) + " err=" + fmt("%.3e", e) + "; ";
      }
    }
  }
  o.detail += "max |u - c| = " + fmt("%.3e", worst) + " over 2 networks x 5 resolutions";
  return o;
}

Outcome comparison_shadow() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto entries = catalog();
  std::size_t systems = 0, pairs = 0, bracket_fail = 0;
  double worst = -1e300;
  for (int i = 0; i < 100; ++i) {
    const CatalogEntry& c = entries[static_cast<std::size_t>(i) % entries.size()];
    SchemeOptions opts = c.scheme;
    const double h = 1.0 / (15.0 + std::floor(45.0 * U(rng)));
    if (U(rng) < 0.3) opts.epsilon = 0.2 * U(rng);
    if (U(rng) < 0.5) opts.junction = JunctionMode::minmax;
    opts.probe_seed = static_cast<std::uint64_t>(i + 1);
    Grid g = Grid::with_spacing(c.network, h);
    std::unique_ptr<ResidualSystem> sys;
    try {
      sys = std::make_unique<ResidualSystem>(assemble(c.problem, g, opts));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidMode) throw;
      opts.junction = JunctionMode::kirchhoff;
      sys = std::make_unique<ResidualSystem>(assemble(c.problem, g, opts));
    }
    ++systems;
    SolveConfig cfg;
    Barriers bar = build_barriers(*sys);
    SolveResult star = solve(*sys, cfg);
    for (std::size_t k = 0; k < g.size(); ++k)
      if (star.solution[k] < bar.lower[k] - 1e-12 || star.solution[k] > bar.upper[k] + 1e-12) {
        ++bracket_fail;
        break;
      }

    std::vector<GridFunction> subs{bar.lower}, sups{bar.upper};
    for (int rep = 0; rep < 2; ++rep)
      for (double sign : {-1.0, 1.0}) {
        GridFunction off(g.size());
        const double amp = std::pow(10.0, -3.0 * U(rng));
        for (auto& x : off) x = sign * (1e-6 + amp * U(rng));
        sys->set_offset(off);
        SolveResult r = solve(*sys, cfg);
        sys->set_offset({});
        if (!r.converged) continue;
        const GridFunction R = sys->residual(r.solution);
        bool certified = true;
        for (double x : R)
          if (sign < 0 ? x > 0.0 : x < 0.0) certified = false;
        if (!certified) continue;
        (sign < 0 ? subs : sups).push_back(r.solution);
      }
    for (const auto& u : subs)
      for (const auto& w : sups) {
        ++pairs;
        for (std::size_t k = 0; k < u.size(); ++k) worst = std::max(worst, u[k] - w[k]);
      }
  }
  if (!(worst <= 1e-12) || bracket_fail > 0) o.pass = false;
  o.detail = std::to_string(systems) + " systems, " + std::to_string(pairs) + " certified sub/super pairs, max(u - w) = " +
             fmt("%.3e", worst) + ", barrier bracket failures = " + std::to_string(bracket_fail);
  return o;
}

Outcome uniqueness_shadow() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SolveConfig cfg;
  double worst = 0.0;
  for (const auto& c : catalog()) {
    Grid g = Grid::with_spacing(c.network, 0.02);
    ResidualSystem sys = assemble(c.problem, g, c.scheme);
    Barriers bar = build_barriers(sys);
    std::vector<GridFunction> starts{bar.lower, bar.upper};
    for (int s = 0; s < 3; ++s) {
      GridFunction r(g.size());
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = bar.lower[k] + U(rng) * (bar.upper[k] - bar.lower[k]);
      starts.push_back(r);
    }
    std::vector<GridFunction> sols;
    for (const auto& s : starts) {
      SolveResult r = solve(sys, cfg, s, &bar);
      if (!r.converged) {
        o.pass = false;
        o.detail += c.name + " start did not converge; ";
        continue;
      }
      sols.push_back(r.solution);
    }
    SolveConfig sweep_cfg = cfg;
    sweep_cfg.method = Method::sweep;
    sweep_cfg.max_sweeps = 200000;
    SolveResult sw = solve(sys, sweep_cfg, bar.upper, &bar);
    if (sw.converged) sols.push_back(sw.solution);
    double e = 0.0;
    for (std::size_t i = 1; i < sols.size(); ++i) e = std::max(e, sup_difference(sols[0], sols[i]));
    worst = std::max(worst, e);
    if (!(e <= 10.0 * cfg.tolerance)) {
      o.pass = false;
      o.detail += c.name + " spread " + fmt("%.3e", e) + "; ";
    }
  }
  o.detail += "max multi-start spread = " + fmt("%.3e", worst) + " (limit " + fmt("%.1e", 10.0 * cfg.tolerance) + ")";
  return o;
}

Outcome linear_oracle() {
  Outcome o;
  double worst_match = 0.0, worst_order = 1e300, closed = 0.0;
  for (const char* name : {"linear_2edge", "linear_3edge"}) {
    CatalogEntry c = catalog_entry(name);
    Grid g400 = Grid::with_spacing(c.network, 1.0 / 400.0);
    SolveResult r = solve_entry(c, g400, c.scheme);
    ReferenceSolution d = direct_linear_solve(*c.problem, g400, c.scheme);
    const double m = sup_difference(r.solution, d.values);
    worst_match = std::max(worst_match, m);
    if (std::string(name) == "linear_2edge") {
      // u = sinh(s) / sinh(2) with s the distance from the end held at 0
      GridFunction exact = g400.sample([&](std::size_t e, double t) {
        const double s = e == 0 ? 1.0 - t : 1.0 + t;
        return std::sinh(s) / std::sinh(2.0);
      });
      closed = sup_difference(r.solution, exact);
    }
    Grid gref = Grid::with_spacing(c.network, 1.0 / 800.0);
    ReferenceSolution ref = direct_linear_solve(*c.problem, gref, c.scheme);
    std::vector<double> errs;
    for (double h : {1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0}) {
      Grid g = Grid::with_spacing(c.network, h);
      SolveResult rr = solve_entry(c, g, c.scheme);
      errs.push_back(sup_difference(rr.solution, transfer(gref, ref.values, g)));
    }
    const double order = richardson_order(errs[0], errs[1], errs[2]);
    worst_order = std::min(worst_order, order);
    o.detail += std::string(name) + ": match " + fmt("%.2e", m) + ", order " + fmt("%.3f", order) + "; ";
  }
  if (!(worst_match <= 1e-8) || !(worst_order >= 1.9)) o.pass = false;
  o.detail += "closed-form sup error (2-edge, h=1/400) " + fmt("%.2e", closed);
  return o;
}

Outcome eikonal_convergence() {
  Outcome o;
  CatalogEntry c = catalog_entry("eikonal_star");
  const std::vector<double> hs{1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0};
  Grid gref = Grid::with_spacing(c.network, hs.back() / 4.0);
  SolveResult ref = solve_entry(c, gref, c.scheme);
  std::vector<double> errs;
  for (double h : hs) {
    Grid g = Grid::with_spacing(c.network, h);
    SolveResult r = solve_entry(c, g, c.scheme);
    errs.push_back(sup_difference(r.solution, transfer(gref, ref.solution, g)));
  }
  const double order = richardson_order(errs[0], errs[1], errs[2]);
  o.pass = order >= 0.9;
  o.detail = "errors " + fmt("%.3e", errs[0]) + ", " + fmt("%.3e", errs[1]) + ", " + fmt("%.3e", errs[2]) +
             " vs 4x-finer reference, order " + fmt("%.3f", order);
  return o;
}

Outcome boundary_loss() {
  Outcome o;
  const double h = 0.01;
  CatalogEntry loss = catalog_entry("loss_star");
  Grid g = Grid::with_spacing(loss.network, h);
  SolveResult r = solve_entry(loss, g, loss.scheme);
  double worst_u = -1e300;
  bool flags = true;
  for (const auto& b : boundary_loss_report(*loss.problem, g, r.solution, 1e-8)) {
    worst_u = std::max(worst_u, b.value);
    if (b.status != "lost") flags = false;
  }
  CatalogEntry visc = catalog_entry("loss_star_viscous");
  Grid gv = Grid::with_spacing(visc.network, h);
  SolveResult rv = solve_entry(visc, gv, visc.scheme);
  double worst_gap = 0.0;
  for (const auto& b : boundary_loss_report(*visc.problem, gv, rv.solution, 1e-8))
    worst_gap = std::max(worst_gap, std::abs(b.gap));
  o.pass = worst_u <= 1.0 + 5.0 * h && flags && worst_gap <= 1e-8;
  o.detail = "degenerate: max u_v = " + fmt("%.6f", worst_u) + " (bound " + fmt("%.3f", 1.0 + 5.0 * h) +
             "), loss flags " + (flags ? "set" : "NOT set") + "; a(v) > 0: max |u_v - h_v| = " + fmt("%.2e", worst_gap);
  return o;
}

Outcome vanishing_viscosity_check() {
  Outcome o;
  const double h = 0.01;
  SolveConfig cfg;
  const auto schedule = geometric_schedule(1.0, 0.5, 9);
  for (const char* name : {"loss_star", "eikonal_star"}) {
    if (!o.detail.empty()) o.detail += "; ";
    CatalogEntry c = catalog_entry(name);
    Grid g = Grid::with_spacing(c.network, h);
    VanishingViscosityReport rep = vanishing_viscosity(c.problem, g, schedule, cfg, c.scheme);
    const std::size_t di = 1;  // delta = 0.1 min length
    bool decreasing = true;
    for (std::size_t k = 1; k < rep.runs.size(); ++k)
      if (!(rep.runs[k].to_limit[di] < rep.runs[k - 1].to_limit[di])) decreasing = false;
    const double last = rep.runs.back().to_limit[di];
    double min_gap = 1e300;
    for (const auto& run : rep.runs)
      for (double gap : run.boundary_gap) min_gap = std::min(min_gap, gap);
    bool ok = decreasing && last <= 5.0 * h;
    if (c.boundary_loss) ok = ok && min_gap >= 0.5;
    o.pass = o.pass && ok;
    o.detail += std::string(name) + ": " + (decreasing ? "decreasing" : "NOT decreasing") + ", final " +
                fmt("%.3e", last) + " (limit " + fmt("%.2f", 5.0 * h) + ")";
    if (c.boundary_loss) o.detail += ", min boundary gap " + fmt("%.3f", min_gap);
  }
  return o;
}

Outcome junction_slopes() {
  Outcome o;
  const double h = 0.01;
  SolveConfig cfg;
  std::size_t checked = 0;
  double worst_f = 0.0;
  for (const auto& c : catalog()) {
    if (!c.degenerate) continue;
    Grid g = Grid::with_spacing(c.network, h);
    ResidualSystem sys = assemble(c.problem, g, c.scheme);
    SolveResult r = solve(sys, cfg);
    if (!r.converged) {
      o.pass = false;
      o.detail += c.name + " did not converge; ";
      continue;
    }
    double worst_sub = -1e300;
    std::string where;
    for (std::size_t v : c.network->interior_vertices()) {
      const KirchhoffCondition& F = c.problem->kirchhoff_at(v);
      const double f = std::abs(F(r.solution[v], sys.inward_differences(r.solution, v)));
      worst_f = std::max(worst_f, f);
      if (!(f <= cfg.tolerance)) {
        o.pass = false;
        o.detail += c.name + " |F| = " + fmt("%.2e", f) + "; ";
      }
      if (degenerate_set(*c.problem, v).empty()) continue;
      JunctionSlopes js = estimate_junction_slopes(g, r.solution, v, default_window(g, v));
      for (const auto& chk : check_degenerate_edge_inequalities(*c.problem, g, r.solution, v, js, 5.0 * h)) {
        if (chk.name != "degenerate_subsolution") continue;
        ++checked;
        const double value = chk.witness["value"].get<double>();
        if (value > worst_sub) {
          worst_sub = value;
          where = chk.location;
        }
      }
    }
    if (worst_sub > 5.0 * h) {
      o.pass = false;
      o.detail += c.name + " max(lambda u + H) = " + fmt("%.3f", worst_sub) + " at " + where;
      // same problem in minmax mode, for comparison
      SchemeOptions mm = c.scheme;
      mm.junction = JunctionMode::minmax;
      ResidualSystem msys = assemble(c.problem, g, mm);
      SolveResult mr = solve(msys, cfg);
      double m_sub = -1e300, m_f = 0.0;
      for (std::size_t v : c.network->interior_vertices()) {
        m_f = std::max(m_f, std::abs(c.problem->kirchhoff_at(v)(mr.solution[v], sys.inward_differences(mr.solution, v))));
        if (degenerate_set(*c.problem, v).empty()) continue;
        JunctionSlopes js = estimate_junction_slopes(g, mr.solution, v, default_window(g, v));
        for (const auto& chk : check_degenerate_edge_inequalities(*c.problem, g, mr.solution, v, js, 5.0 * h))
          if (chk.name == "degenerate_subsolution") m_sub = std::max(m_sub, chk.witness["value"].get<double>());
      }
      o.detail += " (minmax mode: max(lambda u + H) = " + fmt("%.3f", m_sub) + ", max |F| = " + fmt("%.3f", m_f) + "); ";
    }
  }
  o.detail += std::to_string(checked) + " degenerate edges checked at h = 0.01, tolerance 5h; max |F| = " +
              fmt("%.2e", worst_f);
  return o;
}

Outcome lipschitz_uniformity() {
  Outcome o;
  std::size_t entries = 0;
  for (const auto& c : catalog()) {
    if (!c.lipschitz) continue;
    ++entries;
    const double delta = 0.1 * c.network->min_length();
    std::vector<double> L;
    for (double h : {0.02, 0.01, 0.005}) {
      Grid g = Grid::with_spacing(c.network, h);
      SolveResult r = solve_entry(c, g, c.scheme);
      L.push_back(lipschitz_on_interior(g, r.solution, delta));
    }
    const double hi = *std::max_element(L.begin(), L.end()), lo = *std::min_element(L.begin(), L.end());
    const double spread = hi > 1e-6 ? (hi - lo) / hi : 0.0;
    if (!(spread <= 0.05)) {
      o.pass = false;
      o.detail += c.name + " constants " + fmt("%.4f", L[0]) + "/" + fmt("%.4f", L[1]) + "/" + fmt("%.4f", L[2]) + "; ";
    }
  }
  o.detail += std::to_string(entries) + " entries within 5% across h, h/2, h/4" + (o.pass ? "" : " except the above");
  return o;
}

Outcome monotonicity_certification() {
  Outcome o;
  std::size_t systems = 0, passed = 0;
  for (const auto& c : catalog())
    for (double h : {0.05, 0.02})
      for (double eps : {0.0, 0.1})
        for (JunctionMode jm : {JunctionMode::kirchhoff, JunctionMode::minmax}) {
          SchemeOptions opts = c.scheme;
          opts.epsilon = eps;
          opts.junction = jm;
          std::unique_ptr<ResidualSystem> sys;
          try {
            sys = std::make_unique<ResidualSystem>(c.problem, Grid::with_spacing(c.network, h), opts);
          } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidMode) continue;
            throw;
          }
          ++systems;
          ProbeReport rep = sys->probe_monotonicity(100, 1000 + systems);
          if (rep.passed) {
            ++passed;
          } else {
            o.detail += c.name + " witness node " + std::to_string(rep.witness->node) + "; ";
          }
        }
  o.pass = passed == systems;
  o.detail += std::to_string(passed) + "/" + std::to_string(systems) + " systems certified over 100 random grid functions each";
  return o;
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{{1, "constant-solution exactness", constant_exactness},
                                {2, "comparison shadow", comparison_shadow},
                                {3, "uniqueness shadow", uniqueness_shadow},
                                {4, "linear elliptic oracle match", linear_oracle},
                                {5, "degenerate eikonal convergence", eikonal_convergence},
                                {6, "boundary-condition loss", boundary_loss},
                                {7, "vanishing viscosity", vanishing_viscosity_check},
                                {8, "junction slope inequalities", junction_slopes},
                                {9, "Lipschitz uniformity", lipschitz_uniformity},
                                {10, "monotonicity certification", monotonicity_certification}};
  int failures = 0;
  for (const auto& it : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", it.id, it.title, o.detail.c_str(), sec);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(items.size()) - failures, items.size());
  return failures == 0 ? 0 : 1;
}
