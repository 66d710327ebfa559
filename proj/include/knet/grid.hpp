#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "knet/network.hpp"

namespace knet {

using GridFunction = std::vector<double>;

bool is_finite(const GridFunction& u);

struct NodeInfo {
  bool is_vertex = false;
  std::size_t vertex = 0;  // valid when is_vertex
  std::size_t edge = 0;    // owning edge; for vertices the canonical (lowest id) edge
  std::size_t local = 0;   // index along the edge
  double t = 0.0;
};

// Vertex nodes occupy global indices [0, V); interior nodes of edge e follow in order of t.
class Grid {
 public:
  static Grid uniform(std::shared_ptr<const Network> net, std::size_t nodes_per_edge);
  static Grid with_spacing(std::shared_ptr<const Network> net, double h);
  static Grid with_counts(std::shared_ptr<const Network> net, std::vector<std::size_t> counts);

  const Network& network() const { return *net_; }
  std::shared_ptr<const Network> network_ptr() const { return net_; }

  std::size_t size() const { return info_.size(); }
  std::size_t nodes_on_edge(std::size_t e) const { return counts_.at(e); }
  const std::vector<std::size_t>& counts() const { return counts_; }
  double spacing(std::size_t e) const { return spacing_.at(e); }
  double mesh_size() const;

  std::size_t node(std::size_t e, std::size_t j) const;
  const NodeInfo& info(std::size_t k) const { return info_.at(k); }
  NetworkPoint point(std::size_t k) const;
  // Node on edge e adjacent to vertex v.
  std::size_t neighbor_of_vertex(std::size_t v, std::size_t e) const;

  // Every edge gets (n_E - 1) * factor + 1 nodes.
  Grid refined(std::size_t factor) const;

  GridFunction sample(const std::function<double(std::size_t edge, double t)>& f) const;
  GridFunction constant(double c) const { return GridFunction(size(), c); }

  // Distance from each node to the nearest boundary vertex.
  std::vector<double> boundary_distance() const;
  // Nodes x with rho(x, V_b) > delta.
  std::vector<bool> interior_mask(double delta) const;

 private:
  std::shared_ptr<const Network> net_;
  std::vector<std::size_t> counts_;
  std::vector<double> spacing_;
  std::vector<std::size_t> offset_;
  std::vector<NodeInfo> info_;
};

// Values of a fine-grid function at the nodes of a coarser grid on the same network
// (piecewise-linear interpolation along each edge).
GridFunction transfer(const Grid& from, const GridFunction& u, const Grid& to);

double sup_norm(const GridFunction& u);
double sup_difference(const GridFunction& a, const GridFunction& b);
double sup_difference(const GridFunction& a, const GridFunction& b, const std::vector<bool>& mask);

}  // namespace knet
