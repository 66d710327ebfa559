#include "knet/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "knet/errors.hpp"

namespace knet {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_solution_csv(const Grid& grid, const GridFunction& u) {
  if (u.size() != grid.size()) throw Error(ErrorCode::MalformedInput, "solution size does not match the grid");
  const Network& net = grid.network();
  std::string out = "edge_id,t,u\n";
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const double h = grid.spacing(e);
    const std::size_t n = grid.nodes_on_edge(e);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = j + 1 == n ? net.edge(e).length : h * static_cast<double>(j);
      out += std::to_string(net.edge(e).id) + "," + format_double(t) + "," + format_double(u[grid.node(e, j)]) + "\n";
    }
  }
  return out;
}

std::pair<Grid, GridFunction> parse_solution_csv(const std::string& text, std::shared_ptr<const Network> network) {
  const Network& net = *network;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedInput, "empty solution CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "edge_id,t,u") throw Error(ErrorCode::MalformedInput, "solution CSV header must be edge_id,t,u");
  std::vector<std::vector<std::pair<double, double>>> rows(net.edge_count());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int id = 0;
    double t = 0, v = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf%c", &id, &t, &v, &tail) != 3)
      throw Error(ErrorCode::MalformedInput, "bad CSV row at line " + std::to_string(lineno));
    rows[net.edge_index(id)].push_back({t, v});
  }
  std::vector<std::size_t> counts;
  for (std::size_t e = 0; e < net.edge_count(); ++e) counts.push_back(rows[e].size());
  Grid grid = Grid::with_counts(network, counts);
  GridFunction u(grid.size(), std::nan(""));
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const double h = grid.spacing(e);
    for (std::size_t j = 0; j < rows[e].size(); ++j) {
      const auto [t, v] = rows[e][j];
      if (std::abs(t - h * static_cast<double>(j)) > 1e-9 * (1.0 + net.edge(e).length))
        throw Error(ErrorCode::MalformedInput, "CSV rows of edge " + std::to_string(net.edge(e).id) +
                                                   " are not a uniform lattice in increasing t");
      const std::size_t k = grid.node(e, j);
      if (!std::isnan(u[k]) && std::abs(u[k] - v) > 1e-12 * (1.0 + std::abs(v)))
        throw Error(ErrorCode::MalformedInput, "inconsistent vertex values in the solution CSV");
      u[k] = v;
    }
  }
  if (!is_finite(u)) throw Error(ErrorCode::MalformedInput, "solution CSV has non-finite values");
  return {std::move(grid), std::move(u)};
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write to " + tmp + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into " + path);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, path + ": " + e.what());
  }
}

void write_solution_csv(const std::string& path, const Grid& grid, const GridFunction& u) {
  write_atomic(path, format_solution_csv(grid, u));
}

std::pair<Grid, GridFunction> read_solution_csv(const std::string& path, std::shared_ptr<const Network> network) {
  return parse_solution_csv(read_text(path), std::move(network));
}

}  // namespace knet
