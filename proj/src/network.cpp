#include "knet/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>

#include "knet/errors.hpp"

namespace knet {

namespace {

std::atomic<std::uint64_t> next_uid{1};

void all_pairs_distances(std::size_t n, const std::vector<Edge>& edges, std::vector<double>& dist) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : edges) {
    adj[e.head].push_back({e.tail, e.length});
    adj[e.tail].push_back({e.head, e.length});
  }
  dist.assign(n * n, inf);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s * n + s] = 0.0;
    pq.push({0.0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[s * n + v]) continue;
      for (auto [w, len] : adj[v]) {
        if (d + len < dist[s * n + w]) {
          dist[s * n + w] = d + len;
          pq.push({d + len, w});
        }
      }
    }
  }
}

}  // namespace

Network build_network(std::vector<VertexSpec> vspecs, std::vector<EdgeSpec> especs) {
  if (vspecs.empty()) throw Error(ErrorCode::MalformedInput, "network has no vertices");
  std::sort(vspecs.begin(), vspecs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(especs.begin(), especs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  Network net;
  std::map<int, std::size_t> vindex;
  for (const auto& vs : vspecs) {
    if (vindex.count(vs.id)) throw Error(ErrorCode::MalformedInput, "duplicate vertex id " + std::to_string(vs.id));
    vindex[vs.id] = net.vertices_.size();
    net.vertices_.push_back(Vertex{vs.id, vs.position, VertexKind::boundary});
  }

  std::set<int> edge_ids;
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& es : especs) {
    if (!edge_ids.insert(es.id).second)
      throw Error(ErrorCode::DuplicateEdge, "duplicate edge id " + std::to_string(es.id));
    if (!(es.length > 0.0) || !std::isfinite(es.length))
      throw Error(ErrorCode::NonPositiveLength, "edge " + std::to_string(es.id) + " has length " + std::to_string(es.length));
    auto a = vindex.find(es.from);
    auto b = vindex.find(es.to);
    if (a == vindex.end() || b == vindex.end())
      throw Error(ErrorCode::MalformedInput, "edge " + std::to_string(es.id) + " references an unknown vertex");
    if (a->second == b->second)
      throw Error(ErrorCode::MalformedInput, "edge " + std::to_string(es.id) + " is a self-loop");
    std::size_t head = std::min(a->second, b->second);
    std::size_t tail = std::max(a->second, b->second);
    if (!pairs.insert({head, tail}).second)
      throw Error(ErrorCode::DuplicateEdge, "more than one edge joins vertices " + std::to_string(net.vertices_[head].id) +
                                                " and " + std::to_string(net.vertices_[tail].id));
    net.edges_.push_back(Edge{es.id, head, tail, es.length});
  }

  net.incidence_.assign(net.vertices_.size(), {});
  for (std::size_t e = 0; e < net.edges_.size(); ++e) {
    net.incidence_[net.edges_[e].head].push_back({e, true});
    net.incidence_[net.edges_[e].tail].push_back({e, false});
  }
  for (std::size_t v = 0; v < net.vertices_.size(); ++v) {
    if (net.incidence_[v].empty())
      throw Error(ErrorCode::IsolatedVertex, "vertex " + std::to_string(net.vertices_[v].id) + " has no incident edge");
    net.vertices_[v].kind = net.incidence_[v].size() == 1 ? VertexKind::boundary : VertexKind::interior;
  }

  all_pairs_distances(net.vertices_.size(), net.edges_, net.dist_);
  for (double d : net.dist_)
    if (!std::isfinite(d)) throw Error(ErrorCode::DisconnectedGraph, "network is not connected");

  net.uid_ = next_uid++;
  return net;
}

Network make_star(const std::vector<double>& lengths) {
  std::vector<VertexSpec> vs{{0, {}}};
  std::vector<EdgeSpec> es;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    vs.push_back({id, {}});
    es.push_back({static_cast<int>(i), 0, id, lengths[i]});
  }
  return build_network(vs, es);
}

std::vector<std::size_t> Network::interior_vertices() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (!is_boundary(v)) out.push_back(v);
  return out;
}

std::vector<std::size_t> Network::boundary_vertices() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (is_boundary(v)) out.push_back(v);
  return out;
}

std::size_t Network::vertex_index(int id) const {
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (vertices_[v].id == id) return v;
  throw Error(ErrorCode::MalformedInput, "unknown vertex id " + std::to_string(id));
}

std::size_t Network::edge_index(int id) const {
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edges_[e].id == id) return e;
  throw Error(ErrorCode::MalformedInput, "unknown edge id " + std::to_string(id));
}

std::size_t Network::local_index(std::size_t v, std::size_t e) const {
  const auto& inc = incidence_.at(v);
  for (std::size_t i = 0; i < inc.size(); ++i)
    if (inc[i].edge == e) return i;
  throw Error(ErrorCode::EdgeNotIncident,
              "edge " + std::to_string(edges_.at(e).id) + " is not incident to vertex " + std::to_string(vertices_[v].id));
}

double Network::min_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : edges_) m = std::min(m, e.length);
  return m;
}

double Network::max_length() const {
  double m = 0.0;
  for (const auto& e : edges_) m = std::max(m, e.length);
  return m;
}

NetworkPoint Network::vertex_point(std::size_t v) const {
  const Incidence& first = incidence_.at(v).front();
  return NetworkPoint{uid_, first.edge, first.at_start ? 0.0 : edges_[first.edge].length};
}

NetworkPoint Network::point(std::size_t e, double t) const {
  const Edge& ed = edges_.at(e);
  if (!(t >= 0.0 && t <= ed.length))
    throw Error(ErrorCode::MalformedInput, "parameter " + std::to_string(t) + " outside edge " + std::to_string(ed.id));
  if (t == 0.0) return vertex_point(ed.head);
  if (t == ed.length) return vertex_point(ed.tail);
  return NetworkPoint{uid_, e, t};
}

long Network::vertex_at(const NetworkPoint& p) const {
  const Edge& ed = edges_.at(p.edge);
  if (p.t == 0.0) return static_cast<long>(ed.head);
  if (p.t == ed.length) return static_cast<long>(ed.tail);
  return -1;
}

double Network::distance_to_vertex(const NetworkPoint& p, std::size_t v) const {
  const Edge& ed = edges_.at(p.edge);
  return std::min(p.t + vertex_distance(ed.head, v), ed.length - p.t + vertex_distance(ed.tail, v));
}

double geodesic_distance(const Network& net, const NetworkPoint& p, const NetworkPoint& q) {
  if (p.network != net.uid() || q.network != net.uid())
    throw Error(ErrorCode::PointsOnDifferentNetworks, "points do not belong to this network");
  const Edge& ep = net.edge(p.edge);
  const Edge& eq = net.edge(q.edge);
  double best = std::numeric_limits<double>::infinity();
  if (p.edge == q.edge) best = std::abs(p.t - q.t);
  const double dp[2] = {p.t, ep.length - p.t};
  const double dq[2] = {q.t, eq.length - q.t};
  const std::size_t vp[2] = {ep.head, ep.tail};
  const std::size_t vq[2] = {eq.head, eq.tail};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double through = std::min(net.vertex_distance(vp[i], vq[j]), net.vertex_distance(vq[j], vp[i]));
      best = std::min(best, (dp[i] + dq[j]) + through);
    }
  return best;
}

double inward_coordinate(const Network& net, std::size_t v, std::size_t e, double t) {
  const Edge& ed = net.edge(e);
  if (ed.head != v && ed.tail != v)
    throw Error(ErrorCode::EdgeNotIncident,
                "edge " + std::to_string(ed.id) + " is not incident to vertex " + std::to_string(net.vertex(v).id));
  return ed.head == v ? t : ed.length - t;
}

Network network_from_json(const nlohmann::json& doc) {
  try {
    std::vector<VertexSpec> vs;
    std::vector<EdgeSpec> es;
    for (const auto& v : doc.at("vertices")) {
      VertexSpec s;
      s.id = v.at("id").get<int>();
      if (v.contains("position")) s.position = v.at("position").get<std::vector<double>>();
      vs.push_back(s);
    }
    for (const auto& e : doc.at("edges"))
      es.push_back({e.at("id").get<int>(), e.at("from").get<int>(), e.at("to").get<int>(), e.at("length").get<double>()});
    return build_network(std::move(vs), std::move(es));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedInput, std::string("network document: ") + ex.what());
  }
}

nlohmann::json network_to_json(const Network& net) {
  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (const auto& v : net.vertices()) {
    nlohmann::json jv{{"id", v.id}};
    if (!v.position.empty()) jv["position"] = v.position;
    doc["vertices"].push_back(jv);
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : net.edges())
    doc["edges"].push_back(
        {{"id", e.id}, {"from", net.vertex(e.head).id}, {"to", net.vertex(e.tail).id}, {"length", e.length}});
  return doc;
}

}  // namespace knet
