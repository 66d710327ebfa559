#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "knet/grid.hpp"
#include "knet/problem.hpp"
#include "knet/residual.hpp"
#include "knet/solver.hpp"

namespace knet {

struct ReferenceSolution {
  Grid grid;
  GridFunction values;
  std::string provenance;  // "direct-linear" or "fine-grid"
  double error_bound = 0.0;
  double residual = 0.0;

  nlohmann::json to_json() const;
};

// Assembles the discrete linear system for H = b p + c, a + eps > 0, affine F and strong
// boundary data with its own stencil code, then factorizes it.  Only epsilon, flux and
// lf_theta are read from the options.
ReferenceSolution direct_linear_solve(const NetworkProblem& problem, const Grid& grid, const SchemeOptions& options = {});
// Throws ProblemNotLinear when the direct solve does not apply.
void require_linear(const NetworkProblem& problem, const Grid& grid, const SchemeOptions& options = {});
bool linear_oracle_applies(const NetworkProblem& problem, const Grid& grid, const SchemeOptions& options = {});

// Solves on grid.refined(factor) and returns the values at the nodes of `grid`.
// error_bound is the sup difference against the solve at factor / 2.
ReferenceSolution fine_grid_reference(std::shared_ptr<const NetworkProblem> problem, const Grid& grid,
                                      std::size_t factor, const SchemeOptions& options, const SolveConfig& config);

double richardson_order(double e_h, double e_h2, double e_h4);

}  // namespace knet
