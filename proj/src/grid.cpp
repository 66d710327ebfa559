#include "knet/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "knet/errors.hpp"

namespace knet {

bool is_finite(const GridFunction& u) {
  return std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); });
}

Grid Grid::uniform(std::shared_ptr<const Network> net, std::size_t nodes_per_edge) {
  std::vector<std::size_t> counts(net->edge_count(), nodes_per_edge);
  return with_counts(std::move(net), std::move(counts));
}

Grid Grid::with_spacing(std::shared_ptr<const Network> net, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::MalformedInput, "grid spacing must be positive");
  std::vector<std::size_t> counts;
  for (const auto& e : net->edges())
    counts.push_back(std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(e.length / h))) + 1);
  return with_counts(std::move(net), std::move(counts));
}

Grid Grid::with_counts(std::shared_ptr<const Network> net, std::vector<std::size_t> counts) {
  if (counts.size() != net->edge_count()) throw Error(ErrorCode::MalformedInput, "one node count per edge required");
  Grid g;
  g.net_ = std::move(net);
  g.counts_ = std::move(counts);
  const Network& N = *g.net_;
  for (std::size_t v = 0; v < N.vertex_count(); ++v) {
    const auto& first = N.incident(v).front();
    NodeInfo ni;
    ni.is_vertex = true;
    ni.vertex = v;
    ni.edge = first.edge;
    ni.local = 0;
    ni.t = first.at_start ? 0.0 : N.edge(first.edge).length;
    g.info_.push_back(ni);
  }
  for (std::size_t e = 0; e < N.edge_count(); ++e) {
    const std::size_t n = g.counts_[e];
    if (n < 3) throw Error(ErrorCode::MalformedInput, "each edge needs at least 3 nodes");
    const double h = N.edge(e).length / static_cast<double>(n - 1);
    g.spacing_.push_back(h);
    g.offset_.push_back(g.info_.size());
    if (g.info_[N.edge(e).head].edge == e) g.info_[N.edge(e).head].local = 0;
    if (g.info_[N.edge(e).tail].edge == e) g.info_[N.edge(e).tail].local = n - 1;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      NodeInfo ni;
      ni.edge = e;
      ni.local = j;
      ni.t = h * static_cast<double>(j);
      g.info_.push_back(ni);
    }
  }
  return g;
}

double Grid::mesh_size() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

std::size_t Grid::node(std::size_t e, std::size_t j) const {
  const std::size_t n = counts_.at(e);
  if (j >= n) throw Error(ErrorCode::MalformedInput, "node index beyond edge");
  const Edge& ed = net_->edge(e);
  if (j == 0) return ed.head;
  if (j == n - 1) return ed.tail;
  return offset_[e] + j - 1;
}

NetworkPoint Grid::point(std::size_t k) const {
  const NodeInfo& ni = info_.at(k);
  if (ni.is_vertex) return net_->vertex_point(ni.vertex);
  return net_->point(ni.edge, ni.t);
}

std::size_t Grid::neighbor_of_vertex(std::size_t v, std::size_t e) const {
  const Edge& ed = net_->edge(e);
  if (ed.head == v) return node(e, 1);
  if (ed.tail == v) return node(e, counts_[e] - 2);
  throw Error(ErrorCode::EdgeNotIncident, "edge not incident to vertex");
}

Grid Grid::refined(std::size_t factor) const {
  std::vector<std::size_t> c;
  for (auto n : counts_) c.push_back((n - 1) * factor + 1);
  return with_counts(net_, c);
}

GridFunction Grid::sample(const std::function<double(std::size_t, double)>& f) const {
  GridFunction u(size());
  for (std::size_t k = 0; k < size(); ++k) u[k] = f(info_[k].edge, info_[k].t);
  return u;
}

std::vector<double> Grid::boundary_distance() const {
  const auto bv = net_->boundary_vertices();
  std::vector<double> d(size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < size(); ++k) {
    NetworkPoint p{net_->uid(), info_[k].edge, info_[k].t};
    for (std::size_t v : bv) d[k] = std::min(d[k], net_->distance_to_vertex(p, v));
  }
  return d;
}

std::vector<bool> Grid::interior_mask(double delta) const {
  auto d = boundary_distance();
  std::vector<bool> m(size());
  for (std::size_t k = 0; k < size(); ++k) m[k] = d[k] > delta;
  return m;
}

GridFunction transfer(const Grid& from, const GridFunction& u, const Grid& to) {
  if (from.network().uid() != to.network().uid())
    throw Error(ErrorCode::PointsOnDifferentNetworks, "grids live on different networks");
  GridFunction out(to.size());
  for (std::size_t k = 0; k < to.size(); ++k) {
    const NodeInfo& ni = to.info(k);
    if (ni.is_vertex) {
      out[k] = u[ni.vertex];
      continue;
    }
    const std::size_t e = ni.edge;
    const double s = ni.t / from.spacing(e);
    std::size_t j = static_cast<std::size_t>(std::floor(s));
    double w = s - static_cast<double>(j);
    if (w > 1.0 - 1e-9) {
      ++j;
      w = 0.0;
    }
    if (w < 1e-9) w = 0.0;
    const std::size_t n = from.nodes_on_edge(e);
    if (j >= n - 1) {
      out[k] = u[from.node(e, n - 1)];
      continue;
    }
    out[k] = (1.0 - w) * u[from.node(e, j)] + (w > 0.0 ? w * u[from.node(e, j + 1)] : 0.0);
  }
  return out;
}

double sup_norm(const GridFunction& u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

double sup_difference(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double sup_difference(const GridFunction& a, const GridFunction& b, const std::vector<bool>& mask) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (mask[k]) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace knet
