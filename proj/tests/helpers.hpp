#pragma once

#include <memory>

#include <json.hpp>

#include "knet/catalog.hpp"
#include "knet/network.hpp"
#include "knet/problem.hpp"

namespace knet::test {

inline std::shared_ptr<const Network> net_of(const nlohmann::json& doc) {
  return std::make_shared<const Network>(network_from_json(doc));
}

inline std::shared_ptr<const NetworkProblem> problem_of(const nlohmann::json& doc, std::shared_ptr<const Network> net) {
  return std::make_shared<const NetworkProblem>(problem_from_json(doc, std::move(net)));
}

inline nlohmann::json eikonal_problem(double a, double dirichlet) {
  return {{"lambda", 1.0},
          {"edges", {{"hamiltonian", {{"type", "eikonal"}, {"c", 1.0}, {"f", 1.0}}},
                     {"diffusion", {{"type", "constant"}, {"a", a}}}}},
          {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
          {"dirichlet", dirichlet}};
}

inline nlohmann::json heat_problem(double a, double dirichlet) {
  return {{"lambda", 1.0},
          {"edges", {{"hamiltonian", {{"type", "advection"}, {"b", 0.0}, {"f", 0.0}}},
                     {"diffusion", {{"type", "constant"}, {"a", a}}}}},
          {"kirchhoff", {{"family", "classical"}, {"B", 0.0}}},
          {"dirichlet", dirichlet}};
}

}  // namespace knet::test
