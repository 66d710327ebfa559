#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

namespace knet {

enum class VertexKind { interior, boundary };

struct VertexSpec {
  int id = 0;
  std::vector<double> position;
};

struct EdgeSpec {
  int id = 0;
  int from = 0;
  int to = 0;
  double length = 1.0;
};

struct Vertex {
  int id = 0;
  std::vector<double> position;
  VertexKind kind = VertexKind::boundary;
};

// t = 0 sits at `head`, t = length at `tail`; head has the smaller vertex id.
struct Edge {
  int id = 0;
  std::size_t head = 0;
  std::size_t tail = 0;
  double length = 1.0;
};

struct Incidence {
  std::size_t edge = 0;
  bool at_start = true;  // vertex sits at t = 0 of the edge
};

struct NetworkPoint {
  std::uint64_t network = 0;
  std::size_t edge = 0;
  double t = 0.0;

  bool operator==(const NetworkPoint&) const = default;
};

class Network {
 public:
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vertex& vertex(std::size_t v) const { return vertices_.at(v); }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Incident edges ordered by edge id.
  const std::vector<Incidence>& incident(std::size_t v) const { return incidence_.at(v); }
  std::size_t degree(std::size_t v) const { return incidence_.at(v).size(); }
  bool is_boundary(std::size_t v) const { return vertices_.at(v).kind == VertexKind::boundary; }
  std::vector<std::size_t> interior_vertices() const;
  std::vector<std::size_t> boundary_vertices() const;

  std::size_t vertex_index(int id) const;
  std::size_t edge_index(int id) const;
  // Position of edge e in the incidence list of v; throws EdgeNotIncident.
  std::size_t local_index(std::size_t v, std::size_t e) const;

  double vertex_distance(std::size_t a, std::size_t b) const { return dist_[a * vertices_.size() + b]; }
  double min_length() const;
  double max_length() const;

  NetworkPoint point(std::size_t edge, double t) const;
  NetworkPoint vertex_point(std::size_t v) const;
  // Vertex index if the point is a vertex, otherwise -1.
  long vertex_at(const NetworkPoint& p) const;
  double distance_to_vertex(const NetworkPoint& p, std::size_t v) const;

  std::uint64_t uid() const { return uid_; }

 private:
  friend Network build_network(std::vector<VertexSpec>, std::vector<EdgeSpec>);

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<double> dist_;
  std::uint64_t uid_ = 0;
};

Network build_network(std::vector<VertexSpec> vertices, std::vector<EdgeSpec> edges);

// Center vertex id 0, leaves 1..N, edge i joins 0 and i with t measured from the center.
Network make_star(const std::vector<double>& lengths);

double geodesic_distance(const Network& net, const NetworkPoint& p, const NetworkPoint& q);

double inward_coordinate(const Network& net, std::size_t v, std::size_t e, double t);

Network network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const Network& net);

}  // namespace knet
