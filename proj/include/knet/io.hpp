#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "knet/grid.hpp"

namespace knet {

inline constexpr const char* kSolutionCsvSchema = "edge_id,t,u/v1";

// Rows edge_id,t,u for every node of every edge, endpoints included, values printed with %.17g.
std::string format_solution_csv(const Grid& grid, const GridFunction& u);
std::pair<Grid, GridFunction> parse_solution_csv(const std::string& text, std::shared_ptr<const Network> network);

void write_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);
nlohmann::json read_json(const std::string& path);

void write_solution_csv(const std::string& path, const Grid& grid, const GridFunction& u);
std::pair<Grid, GridFunction> read_solution_csv(const std::string& path, std::shared_ptr<const Network> network);

std::string format_double(double x);

}  // namespace knet
