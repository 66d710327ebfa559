#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/network.hpp"

namespace knet {

// Polynomial in the edge parameter t; a scalar is a constant polynomial.
struct Polynomial {
  std::vector<double> coefficients;

  double operator()(double t) const;
  double derivative(double t) const;
  double max_abs(double length) const;
  double lipschitz(double length) const;
  bool is_zero() const;

  static Polynomial from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Envelope {
  double value = 0.0;
  double slope = 0.0;
};

// H(x, p) = b(x) p + c(x)
struct LinearForm {
  std::function<double(double)> b;
  std::function<double(double)> c;
};

// H(x, p) = max_k ( -b_k(x) p - l_k(x) )
struct ControlForm {
  std::vector<std::function<double(double)>> drift;
  std::vector<std::function<double(double)>> running_cost;

  double operator()(double x, double p) const;
};

struct Hamiltonian {
  std::string name = "custom";
  std::function<double(double, double)> value;
  std::function<double(double, double)> slope;               // optional dH/dp
  std::function<Envelope(double, double)> lower_left_fn;     // optional inf_{q <= p} H(x, q)
  std::function<Envelope(double, double)> lower_right_fn;    // optional inf_{q >= p} H(x, q)
  double c_h = 1.0;
  bool coercive = false;
  std::optional<bool> convex;
  std::optional<LinearForm> linear;
  std::optional<ControlForm> control;
  nlohmann::json spec;

  double operator()(double x, double p) const { return value(x, p); }
  double dp(double x, double p) const;
  Envelope lower_left(double x, double p) const;
  Envelope lower_right(double x, double p) const;
};

// H = c|p| - f(x)
Hamiltonian make_eikonal(double c, Polynomial f, double length);
// H = b(x) p - f(x)
Hamiltonian make_advection(Polynomial b, Polynomial f, double length);
// H = c p^2 - f(x); not globally Lipschitz in p
Hamiltonian make_quadratic(double c, Polynomial f, double length);
// H = P(p) - f(x) with P piecewise linear through the knots, extended linearly
Hamiltonian make_piecewise_linear(std::vector<std::pair<double, double>> knots, Polynomial f, double length);
Hamiltonian hamiltonian_from_json(const nlohmann::json& j, double length);

struct Diffusion {
  std::string name = "custom";
  std::function<double(double)> sigma;
  double c_a = 0.0;
  nlohmann::json spec;

  double a(double t) const {
    double s = sigma(t);
    return s * s;
  }
};

Diffusion make_constant_diffusion(double a);
// sigma = slope * distance to the chosen end, so a vanishes there
Diffusion make_linear_vanish(double slope, bool at_start, double length);
Diffusion make_polynomial_diffusion(Polynomial sigma, double length);
Diffusion diffusion_from_json(const nlohmann::json& j, double length);

enum class KirchhoffFamily { classical, affine, pm_split, custom };

const char* to_string(KirchhoffFamily family);

struct KirchhoffParams {
  double alpha0 = 0.0;
  std::vector<double> alpha;  // empty means all ones; one entry is broadcast
  std::vector<double> beta;
  double B = 0.0;
};

struct KirchhoffCondition {
  KirchhoffFamily family = KirchhoffFamily::classical;
  std::size_t arity = 0;
  std::function<double(double, std::span<const double>)> evaluator;
  double alpha0 = 0.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  double B = 0.0;
  bool existence_coercive = true;        // F -> -inf as p_{i0} -> +inf
  std::optional<std::size_t> coercive_index;
  nlohmann::json spec;

  double operator()(double r, std::span<const double> p) const { return evaluator(r, p); }
  // Partial derivatives; analytic for built-in families, finite differences otherwise.
  void gradient(double r, std::span<const double> p, double& dr, std::span<double> dp) const;
  // Lower bound of F(r, p - c 1) - F(r, p) per unit c; zero when unknown.
  double min_slope() const;
  bool is_affine() const { return family == KirchhoffFamily::classical || family == KirchhoffFamily::affine; }
};

KirchhoffCondition make_kirchhoff(KirchhoffFamily family, std::size_t arity, const KirchhoffParams& params);
KirchhoffCondition make_custom_kirchhoff(std::size_t arity, std::function<double(double, std::span<const double>)> f,
                                         bool existence_coercive, std::optional<std::size_t> coercive_index);
KirchhoffCondition kirchhoff_from_json(const nlohmann::json& j, std::size_t arity);

struct EdgeData {
  Hamiltonian hamiltonian;
  Diffusion diffusion;
};

struct NetworkProblem {
  std::shared_ptr<const Network> network;
  double lambda = 1.0;
  std::vector<EdgeData> edges;                            // by edge index
  std::vector<std::optional<KirchhoffCondition>> kirchhoff;  // by vertex index, interior only
  std::vector<std::optional<double>> dirichlet;              // by vertex index, boundary only
  nlohmann::json spec;

  const KirchhoffCondition& kirchhoff_at(std::size_t v) const;
  double dirichlet_at(std::size_t v) const;
  // a_E at the endpoint of edge e that is vertex v.
  double diffusion_at(std::size_t e, std::size_t v) const;
  double vertex_parameter(std::size_t e, std::size_t v) const;
};

// Checks arities and that every vertex carries the data its kind requires.
void check_problem(const NetworkProblem& problem);

NetworkProblem problem_from_json(const nlohmann::json& doc, std::shared_ptr<const Network> network);

std::vector<std::size_t> degenerate_set(const NetworkProblem& problem, std::size_t v);

struct ValidationEntry {
  std::string assumption;
  std::string location;
  bool passed = true;
  double margin = 0.0;
  nlohmann::json witness;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

ValidationReport validate_problem(const NetworkProblem& problem, std::size_t lattice_resolution = 16,
                                  double p_range = 50.0);

}  // namespace knet
