#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/problem.hpp"
#include "knet/residual.hpp"

namespace knet {

struct CatalogEntry {
  std::string name;
  std::string description;
  nlohmann::json network_doc;
  nlohmann::json problem_doc;
  std::shared_ptr<const Network> network;
  std::shared_ptr<const NetworkProblem> problem;
  bool linear = false;           // direct linear oracle applies
  bool degenerate = false;       // some diffusion vanishes at a vertex
  bool lipschitz = false;        // coercive on every edge, so interior Lipschitz bounds apply
  bool boundary_loss = false;    // the degenerate limit loses the Dirichlet datum
  std::optional<double> constant;  // exact solution when it is constant
  SchemeOptions scheme;
};

// Five vertices 0..4, edges (0,1) (1,2) (1,3) (2,3) (3,4); 0 and 4 are boundary vertices.
nlohmann::json five_vertex_graph_doc();
nlohmann::json star_doc(const std::vector<double>& lengths);

std::vector<std::string> catalog_names();
CatalogEntry catalog_entry(const std::string& name);
std::vector<CatalogEntry> catalog();
CatalogEntry make_entry(std::string name, nlohmann::json network_doc, nlohmann::json problem_doc);

}  // namespace knet
