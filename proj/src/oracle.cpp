#include "knet/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "knet/errors.hpp"

namespace knet {

nlohmann::json ReferenceSolution::to_json() const {
  return {{"provenance", provenance}, {"error_bound", error_bound}, {"residual", residual}, {"nodes", values.size()}};
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add(Triplets& t, std::size_t r, std::size_t c, double v) {
  t.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
}

}  // namespace

void require_linear(const NetworkProblem& problem, const Grid& grid, const SchemeOptions& options) {
  const Network& net = grid.network();
  if (net.uid() != problem.network->uid())
    throw Error(ErrorCode::PointsOnDifferentNetworks, "grid and problem use different networks");
  if (options.boundary == BoundaryMode::relaxed)
    throw Error(ErrorCode::ProblemNotLinear, "relaxed boundary rows are not linear");
  const double eps = options.epsilon;
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const EdgeData& ed = problem.edges[e];
    if (!ed.hamiltonian.linear)
      throw Error(ErrorCode::ProblemNotLinear, "edge " + std::to_string(net.edge(e).id) + " has a nonlinear Hamiltonian");
    const double h = grid.spacing(e);
    for (std::size_t j = 0; j < grid.nodes_on_edge(e); ++j)
      if (!(ed.diffusion.a(h * static_cast<double>(j)) + eps > 0.0))
        throw Error(ErrorCode::ProblemNotLinear, "diffusion vanishes on edge " + std::to_string(net.edge(e).id));
  }
  for (std::size_t v : net.interior_vertices())
    if (!problem.kirchhoff_at(v).is_affine())
      throw Error(ErrorCode::ProblemNotLinear, "Kirchhoff condition at vertex " + std::to_string(net.vertex(v).id) +
                                                   " is not affine");
}

bool linear_oracle_applies(const NetworkProblem& problem, const Grid& grid, const SchemeOptions& options) {
  try {
    require_linear(problem, grid, options);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ProblemNotLinear) return false;
    throw;
  }
}

ReferenceSolution direct_linear_solve(const NetworkProblem& problem, const Grid& grid, const SchemeOptions& options) {
  require_linear(problem, grid, options);
  const Network& net = grid.network();
  const double eps = options.epsilon;
  const double lambda = problem.lambda;

  const std::size_t n = grid.size();
  Triplets trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const EdgeData& ed = problem.edges[e];
    const LinearForm& lin = *ed.hamiltonian.linear;
    const double h = grid.spacing(e);
    const double th = options.lf_theta ? *options.lf_theta : ed.hamiltonian.c_h;
    const std::size_t m = grid.nodes_on_edge(e);
    for (std::size_t j = 1; j + 1 < m; ++j) {
      const double t = h * static_cast<double>(j);
      const double a = ed.diffusion.a(t) + eps;
      const double b = lin.b(t);
      const std::size_t k = grid.node(e, j);
      add(trip, k, k, lambda + 2.0 * a / (h * h) + th / h);
      add(trip, k, grid.node(e, j - 1), -a / (h * h) - b / (2.0 * h) - th / (2.0 * h));
      add(trip, k, grid.node(e, j + 1), -a / (h * h) + b / (2.0 * h) - th / (2.0 * h));
      rhs[static_cast<Eigen::Index>(k)] = -lin.c(t);
    }
  }

  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    if (net.is_boundary(v)) {
      add(trip, v, v, 1.0);
      rhs[static_cast<Eigen::Index>(v)] = problem.dirichlet_at(v);
      continue;
    }
    const KirchhoffCondition& F = problem.kirchhoff_at(v);
    double diag = F.alpha0;
    double r = F.B;
    const auto& inc = net.incident(v);
    for (std::size_t i = 0; i < inc.size(); ++i) {
      const std::size_t e = inc[i].edge;
      const EdgeData& ed = problem.edges[e];
      const LinearForm& lin = *ed.hamiltonian.linear;
      const double h = grid.spacing(e);
      const double tv = inc[i].at_start ? 0.0 : net.edge(e).length;
      const double s = inc[i].at_start ? 1.0 : -1.0;
      const std::size_t nb = inc[i].at_start ? grid.node(e, 1) : grid.node(e, grid.nodes_on_edge(e) - 2);
      const double av = ed.diffusion.a(tv) + eps;
      double w = 0.0;
      if (options.flux == JunctionFlux::corrected && ed.hamiltonian.c_h * h <= 2.0 * av) w = 0.5 * h / av;
      // delta_i = g u_nb - (g + w lambda) u_v - w c(v)
      const double g = (1.0 - w * lin.b(tv) * s) / h;
      const double al = F.alpha[i];
      diag += al * (g + w * lambda);
      add(trip, v, nb, -al * g);
      r -= al * w * lin.c(tv);
    }
    add(trip, v, v, diag);
    rhs[static_cast<Eigen::Index>(v)] = r;
  }

  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "sparse LU factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw Error(ErrorCode::SingularSystem, "sparse LU solve failed");

  Eigen::VectorXd row_max = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      row_max[it.row()] = std::max(row_max[it.row()], std::abs(it.value()));
  auto scaled_residual = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd r = A * y - rhs;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < r.size(); ++k) worst = std::max(worst, std::abs(r[k]) / row_max[k]);
    return worst;
  };
  double res = scaled_residual(x);
  for (int it = 0; it < 3 && res > 1e-12; ++it) {
    x -= lu.solve(A * x - rhs);
    res = scaled_residual(x);
  }
  if (!(res <= 1e-12)) throw Error(ErrorCode::SingularSystem, "direct solve residual " + std::to_string(res));

  ReferenceSolution out{grid, GridFunction(x.data(), x.data() + x.size()), "direct-linear", 0.0, res};
  return out;
}

ReferenceSolution fine_grid_reference(std::shared_ptr<const NetworkProblem> problem, const Grid& grid,
                                      std::size_t factor, const SchemeOptions& options, const SolveConfig& config) {
  if (factor < 4 || factor % 2 != 0)
    throw Error(ErrorCode::MalformedInput, "fine-grid factor must be even and at least 4");
  auto run = [&](std::size_t f) {
    Grid fine = grid.refined(f);
    ResidualSystem sys = assemble(problem, fine, options);
    SolveResult r = solve(sys, config);
    if (!r.converged) throw Error(ErrorCode::MaxSweepsExceeded, "fine-grid reference solve did not converge");
    return std::make_pair(transfer(fine, r.solution, grid), r.residual_norm);
  };
  auto [values, res] = run(factor);
  auto [half, res_half] = run(factor / 2);
  (void)res_half;
  ReferenceSolution out{grid, values, "fine-grid", sup_difference(values, half), res};
  return out;
}

double richardson_order(double e_h, double e_h2, double e_h4) {
  if (!(e_h > 0.0) || !(e_h2 > 0.0) || !(e_h4 > 0.0))
    throw Error(ErrorCode::NonPositiveError, "Richardson order needs three positive errors");
  return 0.5 * (std::log2(e_h / e_h2) + std::log2(e_h2 / e_h4));
}

}  // namespace knet
