#include "knet/catalog.hpp"

#include <algorithm>

#include "knet/errors.hpp"

namespace knet {

using nlohmann::json;

json star_doc(const std::vector<double>& lengths) {
  json doc{{"vertices", json::array({{{"id", 0}}})}, {"edges", json::array()}};
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    doc["vertices"].push_back({{"id", id}});
    doc["edges"].push_back({{"id", static_cast<int>(i)}, {"from", 0}, {"to", id}, {"length", lengths[i]}});
  }
  return doc;
}

json five_vertex_graph_doc() {
  return json{{"vertices", json::array({{{"id", 0}}, {{"id", 1}}, {{"id", 2}}, {{"id", 3}}, {{"id", 4}}})},
              {"edges", json::array({{{"id", 0}, {"from", 0}, {"to", 1}, {"length", 1.0}},
                                     {{"id", 1}, {"from", 1}, {"to", 2}, {"length", 0.8}},
                                     {{"id", 2}, {"from", 1}, {"to", 3}, {"length", 1.2}},
                                     {{"id", 3}, {"from", 2}, {"to", 3}, {"length", 0.9}},
                                     {{"id", 4}, {"from", 3}, {"to", 4}, {"length", 1.0}}})}};
}

CatalogEntry make_entry(std::string name, json network_doc, json problem_doc) {
  CatalogEntry c;
  c.name = std::move(name);
  c.network_doc = std::move(network_doc);
  c.problem_doc = std::move(problem_doc);
  auto net = std::make_shared<const Network>(network_from_json(c.network_doc));
  auto pb = std::make_shared<const NetworkProblem>(problem_from_json(c.problem_doc, net));
  c.network = net;
  c.problem = pb;

  bool linear = true, coercive = true, degenerate = false;
  for (std::size_t e = 0; e < net->edge_count(); ++e) {
    const auto& ed = pb->edges[e];
    if (!ed.hamiltonian.linear) linear = false;
    if (!ed.hamiltonian.coercive) coercive = false;
    const double len = net->edge(e).length;
    for (int s = 0; s <= 32; ++s)
      if (!(ed.diffusion.a(len * s / 32.0) > 0.0)) {
        linear = false;
        if (s == 0 || s == 32) degenerate = true;
      }
  }
  for (std::size_t v : net->interior_vertices())
    if (!pb->kirchhoff_at(v).is_affine()) linear = false;
  c.linear = linear;
  c.degenerate = degenerate;
  c.lipschitz = coercive;
  if (linear || !degenerate) c.scheme.flux = JunctionFlux::corrected;
  return c;
}

namespace {

json eikonal(double f = 1.0) { return {{"type", "eikonal"}, {"c", 1.0}, {"f", f}}; }
json constant_a(double a) { return {{"type", "constant"}, {"a", a}}; }

CatalogEntry build(const std::string& name) {
  const std::vector<double> asym{0.75, 1.0, 1.25};
  if (name == "star_constant") {
    // H(x, 0) = -lambda c with c = 1 and a mix of degenerate and elliptic edges
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", eikonal(1.0)}, {"diffusion", constant_a(0.0)}}},
            {"edge_overrides",
             json::array({{{"edge", 1}, {"diffusion", constant_a(0.5)}},
                          {{"edge", 2}, {"diffusion", {{"type", "linear_vanish"}, {"slope", 1.0}, {"at", "from"}}}}})},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet", 1.0}};
    auto c = make_entry(name, star_doc({1.0, 1.0, 1.0}), pb);
    c.description = "constant solution u = 1 on a 3-edge star";
    c.constant = 1.0;
    return c;
  }
  if (name == "graph_constant") {
    json pb{{"lambda", 2.0},
            {"edges", {{"hamiltonian", eikonal(2.0)}, {"diffusion", constant_a(0.0)}}},
            {"edge_overrides",
             json::array({{{"edge", 1}, {"hamiltonian", {{"type", "eikonal"}, {"c", 2.0}, {"f", 2.0}}},
                           {"diffusion", constant_a(0.3)}},
                          {{"edge", 3}, {"hamiltonian", {{"type", "advection"}, {"b", 0.0}, {"f", 2.0}}},
                           {"diffusion", constant_a(1.0)}}})},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet", 1.0}};
    auto c = make_entry(name, five_vertex_graph_doc(), pb);
    c.description = "constant solution u = 1 on the 5-vertex graph";
    c.constant = 1.0;
    return c;
  }
  if (name == "eikonal_star") {
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", eikonal()}, {"diffusion", constant_a(0.0)}}},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet", 0.0}};
    auto c = make_entry(name, star_doc(asym), pb);
    c.description = "degenerate eikonal u + |u'| - 1 = 0 on an asymmetric 3-edge star";
    return c;
  }
  if (name == "eikonal_star_viscous") {
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", eikonal()}, {"diffusion", constant_a(0.05)}}},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet", 0.0}};
    auto c = make_entry(name, star_doc(asym), pb);
    c.description = "eikonal with a = 0.05 on an asymmetric 3-edge star";
    return c;
  }
  if (name == "loss_star") {
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", eikonal()}, {"diffusion", constant_a(0.0)}}},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet", 5.0}};
    auto c = make_entry(name, star_doc(asym), pb);
    c.description = "degenerate eikonal with h = 5; the Dirichlet datum is lost";
    c.boundary_loss = true;
    c.constant = 1.0;
    return c;
  }
  if (name == "loss_star_viscous") {
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", eikonal()}, {"diffusion", constant_a(0.05)}}},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet", 5.0}};
    auto c = make_entry(name, star_doc(asym), pb);
    c.description = "eikonal with a = 0.05 and h = 5; the datum is attained through a layer";
    return c;
  }
  if (name == "degenerate_junction") {
    json pb{{"lambda", 1.0},
            {"edges",
             {{"hamiltonian", eikonal()}, {"diffusion", {{"type", "linear_vanish"}, {"slope", 0.5}, {"at", "from"}}}}},
            {"kirchhoff", {{"family", "affine"}, {"alpha", {1.0, 2.0, 1.0}}, {"B", 0.5}}},
            {"dirichlet", 0.0}};
    auto c = make_entry(name, star_doc({1.0, 1.0, 1.0}), pb);
    c.description = "diffusion vanishing at the junction only, affine Kirchhoff condition";
    return c;
  }
  if (name == "linear_2edge") {
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", {{"type", "advection"}, {"b", 0.0}, {"f", 0.0}}}, {"diffusion", constant_a(1.0)}}},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet_overrides", json::array({{{"vertex", 1}, {"value", 0.0}}, {{"vertex", 2}, {"value", 1.0}}})}};
    auto c = make_entry(name, star_doc({1.0, 1.0}), pb);
    c.description = "u - u'' = 0 on two unit edges, u = 0 and 1 at the ends";
    return c;
  }
  if (name == "linear_3edge") {
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", {{"type", "advection"}, {"b", 0.0}, {"f", 1.0}}}, {"diffusion", constant_a(1.0)}}},
            {"edge_overrides",
             json::array({{{"edge", 1},
                           {"hamiltonian", {{"type", "advection"}, {"b", 0.0}, {"f", 2.0}}},
                           {"diffusion", constant_a(0.5)}},
                          {{"edge", 2},
                           {"hamiltonian", {{"type", "advection"}, {"b", 0.0}, {"f", -0.5}}},
                           {"diffusion", constant_a(2.0)}}})},
            {"kirchhoff", {{"family", "affine"}, {"alpha0", 0.5}, {"alpha", {1.0, 2.0, 1.0}}, {"B", 0.25}}},
            {"dirichlet_overrides", json::array({{{"vertex", 1}, {"value", 0.0}},
                                                 {{"vertex", 2}, {"value", 1.0}},
                                                 {{"vertex", 3}, {"value", 0.5}}})}};
    auto c = make_entry(name, star_doc({1.0, 0.8, 1.2}), pb);
    c.description = "linear elliptic problem with piecewise constant forcing on a 3-edge star";
    return c;
  }
  if (name == "graph_eikonal") {
    json pb{{"lambda", 1.0},
            {"edges", {{"hamiltonian", eikonal()}, {"diffusion", constant_a(0.0)}}},
            {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
            {"dirichlet_overrides", json::array({{{"vertex", 0}, {"value", 0.0}}, {{"vertex", 4}, {"value", 0.2}}})}};
    auto c = make_entry(name, five_vertex_graph_doc(), pb);
    c.description = "degenerate eikonal on the 5-vertex graph";
    return c;
  }
  throw Error(ErrorCode::MalformedInput, "unknown catalog entry '" + name + "'");
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"star_constant", "graph_constant",   "eikonal_star",        "eikonal_star_viscous", "loss_star",
          "loss_star_viscous", "degenerate_junction", "linear_2edge", "linear_3edge",        "graph_eikonal"};
}

CatalogEntry catalog_entry(const std::string& name) { return build(name); }

std::vector<CatalogEntry> catalog() {
  std::vector<CatalogEntry> out;
  for (const auto& n : catalog_names()) out.push_back(build(n));
  return out;
}

}  // namespace knet
