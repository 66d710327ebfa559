#include "knet/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "knet/errors.hpp"

namespace knet {

namespace {

constexpr double kTiny = 1e-12;

double sample_max(const std::function<double(double)>& f, double length, int samples = 257) {
  double m = 0.0;
  for (int i = 0; i < samples; ++i) m = std::max(m, std::abs(f(length * i / (samples - 1))));
  return m;
}

Envelope generic_lower(const Hamiltonian& h, double x, double p, bool left) {
  if (!h.coercive)
    throw Error(ErrorCode::InvalidMode, "lower envelope of Hamiltonian '" + h.name + "' needs a coercive Hamiltonian");
  const double hp = h.value(x, p);
  const double reach = h.c_h * (hp + h.c_h);
  double lo = left ? -reach : p;
  double hi = left ? p : reach;
  if (hi <= lo) return {hp, h.dp(x, p)};
  const int n = 256;
  double best = hp;
  int best_i = left ? n : 0;
  for (int i = 0; i <= n; ++i) {
    double q = lo + (hi - lo) * i / n;
    double v = h.value(x, q);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  int edge_i = left ? n : 0;
  if (best_i == edge_i) return {hp, h.dp(x, p)};
  double a = lo + (hi - lo) * std::max(best_i - 1, 0) / n;
  double b = lo + (hi - lo) * std::min(best_i + 1, n) / n;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = h.value(x, c), fd = h.value(x, d);
  for (int it = 0; it < 80 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = h.value(x, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = h.value(x, d);
    }
  }
  best = std::min(best, std::min(fc, fd));
  return {std::min(best, hp), 0.0};
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t n, double fallback, const char* what) {
  if (v.empty()) return std::vector<double>(n, fallback);
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  if (v.size() != n)
    throw Error(ErrorCode::MalformedInput, std::string("Kirchhoff coefficient list '") + what + "' has length " +
                                               std::to_string(v.size()) + ", expected " + std::to_string(n));
  return v;
}

std::vector<double> json_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

}  // namespace

double Polynomial::operator()(double t) const {
  double r = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) r = r * t + *it;
  return r;
}

double Polynomial::derivative(double t) const {
  double r = 0.0;
  for (std::size_t k = coefficients.size(); k-- > 1;) r = r * t + static_cast<double>(k) * coefficients[k];
  return r;
}

double Polynomial::max_abs(double length) const {
  return sample_max([this](double t) { return (*this)(t); }, length);
}

double Polynomial::lipschitz(double length) const {
  return sample_max([this](double t) { return derivative(t); }, length);
}

bool Polynomial::is_zero() const {
  return std::all_of(coefficients.begin(), coefficients.end(), [](double c) { return c == 0.0; });
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
  if (j.is_number()) return Polynomial{{j.get<double>()}};
  if (j.is_array()) return Polynomial{j.get<std::vector<double>>()};
  throw Error(ErrorCode::MalformedInput, "coefficient must be a number or an array of polynomial coefficients");
}

nlohmann::json Polynomial::to_json() const {
  if (coefficients.size() == 1) return coefficients[0];
  return coefficients;
}

double ControlForm::operator()(double x, double p) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < drift.size(); ++k) best = std::max(best, -drift[k](x) * p - running_cost[k](x));
  return best;
}

double Hamiltonian::dp(double x, double p) const {
  if (slope) return slope(x, p);
  double s = 1e-6 * std::max(1.0, std::abs(p));
  return (value(x, p + s) - value(x, p - s)) / (2.0 * s);
}

Envelope Hamiltonian::lower_left(double x, double p) const {
  if (lower_left_fn) return lower_left_fn(x, p);
  return generic_lower(*this, x, p, true);
}

Envelope Hamiltonian::lower_right(double x, double p) const {
  if (lower_right_fn) return lower_right_fn(x, p);
  return generic_lower(*this, x, p, false);
}

Hamiltonian make_eikonal(double c, Polynomial f, double length) {
  if (!(c > 0.0)) throw Error(ErrorCode::MalformedInput, "eikonal speed c must be positive");
  Hamiltonian h;
  h.name = "eikonal";
  h.value = [c, f](double x, double p) { return c * std::abs(p) - f(x); };
  h.slope = [c](double, double p) { return p > 0 ? c : (p < 0 ? -c : 0.0); };
  h.lower_left_fn = [c, f](double x, double p) {
    return p < 0 ? Envelope{-c * p - f(x), -c} : Envelope{-f(x), 0.0};
  };
  h.lower_right_fn = [c, f](double x, double p) {
    return p > 0 ? Envelope{c * p - f(x), c} : Envelope{-f(x), 0.0};
  };
  h.c_h = std::max({c, 1.0 / c, f.max_abs(length), f.lipschitz(length), kTiny});
  h.coercive = true;
  h.convex = true;
  ControlForm cf;
  cf.drift = {[c](double) { return c; }, [c](double) { return -c; }};
  cf.running_cost = {f, f};
  h.control = cf;
  h.spec = {{"type", "eikonal"}, {"c", c}, {"f", f.to_json()}};
  return h;
}

Hamiltonian make_advection(Polynomial b, Polynomial f, double length) {
  Hamiltonian h;
  h.name = "advection";
  h.value = [b, f](double x, double p) { return b(x) * p - f(x); };
  h.slope = [b](double x, double) { return b(x); };
  if (b.is_zero()) {
    h.lower_left_fn = [f](double x, double) { return Envelope{-f(x), 0.0}; };
    h.lower_right_fn = h.lower_left_fn;
  }
  h.c_h = std::max({b.max_abs(length), b.lipschitz(length), f.lipschitz(length), kTiny});
  h.coercive = false;
  h.convex = true;
  h.linear = LinearForm{b, [f](double x) { return -f(x); }};
  h.spec = {{"type", "advection"}, {"b", b.to_json()}, {"f", f.to_json()}};
  return h;
}

Hamiltonian make_quadratic(double c, Polynomial f, double length) {
  if (!(c > 0.0)) throw Error(ErrorCode::MalformedInput, "quadratic coefficient c must be positive");
  Hamiltonian h;
  h.name = "quadratic";
  h.value = [c, f](double x, double p) { return c * p * p - f(x); };
  h.slope = [c](double, double p) { return 2.0 * c * p; };
  h.lower_left_fn = [c, f](double x, double p) {
    return p < 0 ? Envelope{c * p * p - f(x), 2.0 * c * p} : Envelope{-f(x), 0.0};
  };
  h.lower_right_fn = [c, f](double x, double p) {
    return p > 0 ? Envelope{c * p * p - f(x), 2.0 * c * p} : Envelope{-f(x), 0.0};
  };
  h.c_h = std::max({c, 1.0 / (4.0 * c) + f.max_abs(length), f.lipschitz(length), 1.0});
  h.coercive = true;
  h.convex = true;
  h.spec = {{"type", "quadratic"}, {"c", c}, {"f", f.to_json()}};
  return h;
}

Hamiltonian make_piecewise_linear(std::vector<std::pair<double, double>> knots, Polynomial f, double length) {
  if (knots.size() < 2) throw Error(ErrorCode::MalformedInput, "piecewise-linear Hamiltonian needs at least two knots");
  std::sort(knots.begin(), knots.end());
  for (std::size_t k = 1; k < knots.size(); ++k)
    if (!(knots[k].first > knots[k - 1].first))
      throw Error(ErrorCode::MalformedInput, "piecewise-linear Hamiltonian knots must be distinct");
  std::vector<double> slopes;
  for (std::size_t k = 1; k < knots.size(); ++k)
    slopes.push_back((knots[k].second - knots[k - 1].second) / (knots[k].first - knots[k - 1].first));

  auto segment = [knots, slopes](double p) -> std::size_t {
    std::size_t k = 0;
    while (k + 1 < slopes.size() && p > knots[k + 1].first) ++k;
    return k;
  };
  auto shape = [knots, slopes, segment](double p) {
    std::size_t k = segment(p);
    return knots[k].second + slopes[k] * (p - knots[k].first);
  };
  auto shape_slope = [slopes, segment](double p) { return slopes[segment(p)]; };

  Hamiltonian h;
  h.name = "lf_custom";
  h.value = [shape, f](double x, double p) { return shape(p) - f(x); };
  h.slope = [shape_slope](double, double p) { return shape_slope(p); };

  const double sl = slopes.front(), sr = slopes.back();
  h.coercive = sl < 0.0 && sr > 0.0;
  double lip_p = 0.0;
  for (double s : slopes) lip_p = std::max(lip_p, std::abs(s));
  double c = std::max({lip_p, f.max_abs(length), f.lipschitz(length), kTiny});
  if (h.coercive) {
    double m = std::min(-sl, sr);
    double k = 0.0;
    for (const auto& [p, v] : knots) k = std::max(k, m * std::abs(p) - v);
    c = std::max({c, 1.0 / m, k + f.max_abs(length)});
    h.lower_left_fn = [knots, shape, shape_slope, f](double x, double p) {
      double best = shape(p);
      double s = shape_slope(p);
      for (const auto& [q, v] : knots)
        if (q <= p && v < best) {
          best = v;
          s = 0.0;
        }
      return Envelope{best - f(x), s};
    };
    h.lower_right_fn = [knots, shape, shape_slope, f](double x, double p) {
      double best = shape(p);
      double s = shape_slope(p);
      for (const auto& [q, v] : knots)
        if (q >= p && v < best) {
          best = v;
          s = 0.0;
        }
      return Envelope{best - f(x), s};
    };
  }
  h.c_h = c;
  h.convex = std::is_sorted(slopes.begin(), slopes.end());
  nlohmann::json jk = nlohmann::json::array();
  for (const auto& [p, v] : knots) jk.push_back({p, v});
  h.spec = {{"type", "lf_custom"}, {"knots", jk}, {"f", f.to_json()}};
  return h;
}

Hamiltonian hamiltonian_from_json(const nlohmann::json& j, double length) {
  try {
    const std::string type = j.at("type").get<std::string>();
    Polynomial f = j.contains("f") ? Polynomial::from_json(j.at("f")) : Polynomial{{type == "eikonal" ? 1.0 : 0.0}};
    Hamiltonian h;
    if (type == "eikonal") {
      h = make_eikonal(j.value("c", 1.0), f, length);
    } else if (type == "advection") {
      h = make_advection(j.contains("b") ? Polynomial::from_json(j.at("b")) : Polynomial{{0.0}}, f, length);
    } else if (type == "quadratic") {
      h = make_quadratic(j.value("c", 1.0), f, length);
    } else if (type == "lf_custom") {
      std::vector<std::pair<double, double>> knots;
      for (const auto& k : j.at("knots")) knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
      h = make_piecewise_linear(knots, f, length);
    } else {
      throw Error(ErrorCode::MalformedInput, "unknown Hamiltonian type '" + type + "'");
    }
    if (j.contains("C_H")) {
      double c = j.at("C_H").get<double>();
      if (!(c > 0.0)) throw Error(ErrorCode::MalformedInput, "C_H must be positive");
      h.c_h = c;
      h.spec["C_H"] = c;
    }
    return h;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedInput, std::string("Hamiltonian spec: ") + ex.what());
  }
}

Diffusion make_constant_diffusion(double a) {
  if (!(a >= 0.0)) throw Error(ErrorCode::MalformedInput, "diffusion must be nonnegative");
  Diffusion d;
  d.name = "constant";
  double s = std::sqrt(a);
  d.sigma = [s](double) { return s; };
  d.c_a = 0.0;
  d.spec = {{"type", "constant"}, {"a", a}};
  return d;
}

Diffusion make_linear_vanish(double slope, bool at_start, double length) {
  Diffusion d;
  d.name = "linear_vanish";
  double s = std::abs(slope);
  d.sigma = [s, at_start, length](double t) { return s * (at_start ? t : length - t); };
  d.c_a = s;
  d.spec = {{"type", "linear_vanish"}, {"slope", slope}, {"at", at_start ? "from" : "to"}};
  return d;
}

Diffusion make_polynomial_diffusion(Polynomial sigma, double length) {
  Diffusion d;
  d.name = "polynomial";
  d.sigma = [sigma](double t) { return std::abs(sigma(t)); };
  d.c_a = sigma.lipschitz(length);
  d.spec = {{"type", "polynomial"}, {"sigma", sigma.to_json()}};
  return d;
}

Diffusion diffusion_from_json(const nlohmann::json& j, double length) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") return make_constant_diffusion(j.value("a", 0.0));
    if (type == "linear_vanish") {
      std::string at = j.value("at", std::string("from"));
      if (at != "from" && at != "to") throw Error(ErrorCode::MalformedInput, "linear_vanish 'at' must be from or to");
      return make_linear_vanish(j.value("slope", 1.0), at == "from", length);
    }
    if (type == "polynomial") return make_polynomial_diffusion(Polynomial::from_json(j.at("sigma")), length);
    throw Error(ErrorCode::MalformedInput, "unknown diffusion type '" + type + "'");
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedInput, std::string("diffusion spec: ") + ex.what());
  }
}

const char* to_string(KirchhoffFamily family) {
  switch (family) {
    case KirchhoffFamily::classical: return "classical";
    case KirchhoffFamily::affine: return "affine";
    case KirchhoffFamily::pm_split: return "pm_split";
    case KirchhoffFamily::custom: return "custom";
  }
  return "custom";
}

KirchhoffCondition make_kirchhoff(KirchhoffFamily family, std::size_t arity, const KirchhoffParams& params) {
  if (arity < 1) throw Error(ErrorCode::MalformedInput, "Kirchhoff arity must be positive");
  KirchhoffCondition k;
  k.family = family;
  k.arity = arity;
  k.B = params.B;
  k.existence_coercive = true;
  k.coercive_index = 0;
  switch (family) {
    case KirchhoffFamily::classical:
      k.alpha0 = 0.0;
      k.alpha.assign(arity, 1.0);
      break;
    case KirchhoffFamily::affine:
      k.alpha0 = params.alpha0;
      k.alpha = broadcast(params.alpha, arity, 1.0, "alpha");
      break;
    case KirchhoffFamily::pm_split:
      k.alpha0 = params.alpha0;
      k.alpha = broadcast(params.alpha, arity, 1.0, "alpha");
      k.beta = broadcast(params.beta, arity, 1.0, "beta");
      break;
    case KirchhoffFamily::custom:
      throw Error(ErrorCode::MalformedInput, "use make_custom_kirchhoff for custom conditions");
  }
  if (k.alpha0 < 0.0) throw Error(ErrorCode::InvalidCoefficientSign, "alpha0 must be nonnegative");
  for (double a : k.alpha)
    if (!(a > 0.0)) throw Error(ErrorCode::InvalidCoefficientSign, "alpha_i must be positive");
  for (double b : k.beta)
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidCoefficientSign, "beta_i must be positive");

  if (family == KirchhoffFamily::pm_split) {
    k.evaluator = [a0 = k.alpha0, a = k.alpha, b = k.beta, B = k.B](double r, std::span<const double> p) {
      double s = a0 * r - B;
      for (std::size_t i = 0; i < p.size(); ++i) {
        double m = -p[i];
        s += m > 0 ? a[i] * m : b[i] * m;
      }
      return s;
    };
  } else {
    k.evaluator = [a0 = k.alpha0, a = k.alpha, B = k.B](double r, std::span<const double> p) {
      double s = a0 * r - B;
      for (std::size_t i = 0; i < p.size(); ++i) s -= a[i] * p[i];
      return s;
    };
  }
  k.spec = {{"family", to_string(family)}, {"B", k.B}};
  if (family != KirchhoffFamily::classical) {
    k.spec["alpha0"] = k.alpha0;
    k.spec["alpha"] = k.alpha;
  }
  if (family == KirchhoffFamily::pm_split) k.spec["beta"] = k.beta;
  return k;
}

KirchhoffCondition make_custom_kirchhoff(std::size_t arity, std::function<double(double, std::span<const double>)> f,
                                         bool existence_coercive, std::optional<std::size_t> coercive_index) {
  KirchhoffCondition k;
  k.family = KirchhoffFamily::custom;
  k.arity = arity;
  k.evaluator = std::move(f);
  k.existence_coercive = existence_coercive;
  k.coercive_index = coercive_index;
  k.spec = {{"family", "custom"}};
  return k;
}

void KirchhoffCondition::gradient(double r, std::span<const double> p, double& dr, std::span<double> dp) const {
  switch (family) {
    case KirchhoffFamily::classical:
    case KirchhoffFamily::affine:
      dr = alpha0;
      for (std::size_t i = 0; i < p.size(); ++i) dp[i] = -alpha[i];
      return;
    case KirchhoffFamily::pm_split:
      dr = alpha0;
      for (std::size_t i = 0; i < p.size(); ++i) dp[i] = -p[i] < 0 ? -beta[i] : -alpha[i];
      return;
    case KirchhoffFamily::custom: {
      std::vector<double> q(p.begin(), p.end());
      double s = 1e-7 * std::max(1.0, std::abs(r));
      dr = (evaluator(r + s, q) - evaluator(r - s, q)) / (2 * s);
      for (std::size_t i = 0; i < q.size(); ++i) {
        double si = 1e-7 * std::max(1.0, std::abs(q[i]));
        double keep = q[i];
        q[i] = keep + si;
        double fp = evaluator(r, q);
        q[i] = keep - si;
        double fm = evaluator(r, q);
        q[i] = keep;
        dp[i] = (fp - fm) / (2 * si);
      }
      return;
    }
  }
}

double KirchhoffCondition::min_slope() const {
  if (family == KirchhoffFamily::custom) return 0.0;
  double m = std::numeric_limits<double>::infinity();
  for (double a : alpha) m = std::min(m, a);
  for (double b : beta) m = std::min(m, b);
  return m;
}

KirchhoffCondition kirchhoff_from_json(const nlohmann::json& j, std::size_t arity) {
  try {
    const std::string fam = j.value("family", std::string("classical"));
    KirchhoffParams p;
    p.B = j.value("B", 0.0);
    p.alpha0 = j.value("alpha0", 0.0);
    p.alpha = json_list(j, "alpha");
    p.beta = json_list(j, "beta");
    if (fam == "classical") return make_kirchhoff(KirchhoffFamily::classical, arity, p);
    if (fam == "affine") return make_kirchhoff(KirchhoffFamily::affine, arity, p);
    if (fam == "pm_split" || fam == "pm-split") return make_kirchhoff(KirchhoffFamily::pm_split, arity, p);
    throw Error(ErrorCode::MalformedInput, "unknown Kirchhoff family '" + fam + "'");
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedInput, std::string("Kirchhoff spec: ") + ex.what());
  }
}

const KirchhoffCondition& NetworkProblem::kirchhoff_at(std::size_t v) const {
  if (v >= kirchhoff.size() || !kirchhoff[v])
    throw Error(ErrorCode::VertexNotInterior, "no Kirchhoff condition at vertex index " + std::to_string(v));
  return *kirchhoff[v];
}

double NetworkProblem::dirichlet_at(std::size_t v) const {
  if (v >= dirichlet.size() || !dirichlet[v])
    throw Error(ErrorCode::VertexNotBoundary, "no Dirichlet datum at vertex index " + std::to_string(v));
  return *dirichlet[v];
}

double NetworkProblem::vertex_parameter(std::size_t e, std::size_t v) const {
  const Edge& ed = network->edge(e);
  if (ed.head == v) return 0.0;
  if (ed.tail == v) return ed.length;
  throw Error(ErrorCode::EdgeNotIncident, "edge index " + std::to_string(e) + " not incident to vertex index " +
                                              std::to_string(v));
}

double NetworkProblem::diffusion_at(std::size_t e, std::size_t v) const {
  return edges.at(e).diffusion.a(vertex_parameter(e, v));
}

void check_problem(const NetworkProblem& problem) {
  if (!problem.network) throw Error(ErrorCode::MalformedInput, "problem has no network");
  const Network& net = *problem.network;
  if (!(problem.lambda > 0.0)) throw Error(ErrorCode::MalformedInput, "lambda must be positive");
  if (problem.edges.size() != net.edge_count())
    throw Error(ErrorCode::MalformedInput, "edge data count does not match the network");
  for (const auto& ed : problem.edges)
    if (!ed.hamiltonian.value || !ed.diffusion.sigma)
      throw Error(ErrorCode::MalformedInput, "edge data missing an evaluator");
  if (problem.kirchhoff.size() != net.vertex_count() || problem.dirichlet.size() != net.vertex_count())
    throw Error(ErrorCode::MalformedInput, "vertex data count does not match the network");
  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    if (net.is_boundary(v)) {
      if (!problem.dirichlet[v])
        throw Error(ErrorCode::MalformedInput, "boundary vertex " + std::to_string(net.vertex(v).id) + " lacks a Dirichlet datum");
    } else {
      if (!problem.kirchhoff[v])
        throw Error(ErrorCode::MalformedInput, "interior vertex " + std::to_string(net.vertex(v).id) + " lacks a Kirchhoff condition");
      if (problem.kirchhoff[v]->arity != net.degree(v))
        throw Error(ErrorCode::MalformedInput, "Kirchhoff arity at vertex " + std::to_string(net.vertex(v).id) +
                                                   " does not match its degree");
    }
  }
}

NetworkProblem problem_from_json(const nlohmann::json& doc, std::shared_ptr<const Network> network) {
  try {
    const Network& net = *network;
    NetworkProblem pb;
    pb.network = network;
    pb.spec = doc;
    pb.lambda = doc.value("lambda", 1.0);

    const nlohmann::json default_edge = doc.value("edges", nlohmann::json::object());
    std::vector<nlohmann::json> edge_specs(net.edge_count(), default_edge);
    for (const auto& o : doc.value("edge_overrides", nlohmann::json::array())) {
      std::size_t e = net.edge_index(o.at("edge").get<int>());
      for (const auto& [k, v] : o.items())
        if (k != "edge") edge_specs[e][k] = v;
    }
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
      double len = net.edge(e).length;
      const auto& js = edge_specs[e];
      if (!js.contains("hamiltonian"))
        throw Error(ErrorCode::MalformedInput, "edge " + std::to_string(net.edge(e).id) + " has no Hamiltonian");
      nlohmann::json dj = js.value("diffusion", nlohmann::json{{"type", "constant"}, {"a", 0.0}});
      if (dj.contains("vertex")) {
        // "vertex": id of the end where a linear_vanish profile vanishes, independent of orientation
        std::size_t v = net.vertex_index(dj.at("vertex").get<int>());
        if (v != net.edge(e).head && v != net.edge(e).tail)
          throw Error(ErrorCode::EdgeNotIncident, "diffusion vertex is not an end of edge " + std::to_string(net.edge(e).id));
        dj["at"] = v == net.edge(e).head ? "from" : "to";
        dj.erase("vertex");
      }
      Diffusion d = diffusion_from_json(dj, len);
      pb.edges.push_back({hamiltonian_from_json(js.at("hamiltonian"), len), d});
    }

    const nlohmann::json default_k = doc.value("kirchhoff", nlohmann::json{{"family", "classical"}, {"B", 0.0}});
    std::vector<nlohmann::json> k_specs(net.vertex_count(), default_k);
    for (const auto& o : doc.value("kirchhoff_overrides", nlohmann::json::array())) {
      std::size_t v = net.vertex_index(o.at("vertex").get<int>());
      nlohmann::json s = o;
      s.erase("vertex");
      k_specs[v] = s;
    }
    const double default_h = doc.value("dirichlet", 0.0);
    std::vector<double> h_values(net.vertex_count(), default_h);
    for (const auto& o : doc.value("dirichlet_overrides", nlohmann::json::array()))
      h_values[net.vertex_index(o.at("vertex").get<int>())] = o.at("value").get<double>();

    pb.kirchhoff.resize(net.vertex_count());
    pb.dirichlet.resize(net.vertex_count());
    for (std::size_t v = 0; v < net.vertex_count(); ++v) {
      if (net.is_boundary(v))
        pb.dirichlet[v] = h_values[v];
      else
        pb.kirchhoff[v] = kirchhoff_from_json(k_specs[v], net.degree(v));
    }
    check_problem(pb);
    return pb;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedInput, std::string("problem document: ") + ex.what());
  }
}

std::vector<std::size_t> degenerate_set(const NetworkProblem& problem, std::size_t v) {
  const Network& net = *problem.network;
  if (v >= net.vertex_count() || net.is_boundary(v))
    throw Error(ErrorCode::VertexNotInterior, "degenerate set requested at a non-interior vertex");
  std::vector<std::size_t> out;
  for (const auto& inc : net.incident(v))
    if (problem.diffusion_at(inc.edge, v) == 0.0) out.push_back(inc.edge);
  return out;
}

bool ValidationReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : entries)
    out.push_back({{"assumption", e.assumption},
                   {"location", e.location},
                   {"verdict", e.passed ? "PASS" : "FAIL"},
                   {"margin", e.margin},
                   {"witness", e.witness}});
  return out;
}

ValidationReport validate_problem(const NetworkProblem& problem, std::size_t lattice_resolution, double p_range) {
  ValidationReport rep;
  const Network& net = *problem.network;
  const std::size_t n = std::max<std::size_t>(lattice_resolution, 8);
  const double rel = 1e-9;

  std::vector<double> ps;
  for (std::size_t i = 0; i <= 2 * n; ++i) ps.push_back(-p_range + 2.0 * p_range * i / (2 * n));

  rep.entries.push_back({"lambda_positive", "problem", problem.lambda > 0, problem.lambda, nlohmann::json::object()});

  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const auto& ed = problem.edges[e];
    const Hamiltonian& H = ed.hamiltonian;
    const double len = net.edge(e).length;
    const double C = H.c_h;
    const std::string loc = "edge " + std::to_string(net.edge(e).id);
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(len * i / (n - 1));

    ValidationEntry lx{"H_lipschitz_x", loc, true, std::numeric_limits<double>::infinity(), nlohmann::json::object()};
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      for (double p : ps) {
        double lhs = std::abs(H(xs[i], p) - H(xs[i + 1], p));
        double rhs = C * (1 + std::abs(p)) * (xs[i + 1] - xs[i]);
        double slack = rhs - lhs;
        if (slack < lx.margin) {
          lx.margin = slack;
          if (slack < -rel * (1 + rhs)) {
            lx.passed = false;
            lx.witness = {{"x", xs[i]}, {"y", xs[i + 1]}, {"p", p}};
          }
        }
      }
    rep.entries.push_back(lx);

    ValidationEntry lp{"H_lipschitz_p", loc, true, std::numeric_limits<double>::infinity(), nlohmann::json::object()};
    for (double x : xs)
      for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
        double lhs = std::abs(H(x, ps[i]) - H(x, ps[i + 1]));
        double rhs = C * (ps[i + 1] - ps[i]);
        double slack = rhs - lhs;
        if (slack < lp.margin) {
          lp.margin = slack;
          if (slack < -rel * (1 + rhs)) {
            lp.passed = false;
            lp.witness = {{"x", x}, {"p", ps[i]}, {"q", ps[i + 1]}};
          }
        }
      }
    rep.entries.push_back(lp);

    if (H.coercive) {
      ValidationEntry co{"H_coercive", loc, true, std::numeric_limits<double>::infinity(), nlohmann::json::object()};
      for (double x : xs)
        for (double p : ps) {
          double slack = H(x, p) - (std::abs(p) / C - C);
          if (slack < co.margin) {
            co.margin = slack;
            if (slack < -rel * (1 + std::abs(p))) {
              co.passed = false;
              co.witness = {{"x", x}, {"p", p}};
            }
          }
        }
      rep.entries.push_back(co);
    }

    ValidationEntry sg{"sigma_lipschitz", loc, true, std::numeric_limits<double>::infinity(), nlohmann::json::object()};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double s = ed.diffusion.sigma(xs[i]);
      if (s < 0 || !std::isfinite(s)) {
        sg.passed = false;
        sg.witness = {{"x", xs[i]}, {"sigma", s}};
      }
      // finer sampling near the ends where square-root type profiles break the bound
      for (double d : {1e-6 * len, (xs.size() > 1 ? xs[1] - xs[0] : len)}) {
        double y = xs[i] + d;
        if (y > len) continue;
        double slack = ed.diffusion.c_a * d - std::abs(ed.diffusion.sigma(y) - s);
        if (slack < sg.margin) {
          sg.margin = slack;
          if (slack < -rel * (1 + d)) {
            sg.passed = false;
            sg.witness = {{"x", xs[i]}, {"y", y}};
          }
        }
      }
    }
    rep.entries.push_back(sg);
  }

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-10.0, 10.0), Upos(0.0, 5.0);
  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    const std::string loc = "vertex " + std::to_string(net.vertex(v).id);
    if (net.is_boundary(v)) {
      const auto& inc = net.incident(v).front();
      double a = problem.diffusion_at(inc.edge, v);
      bool ok = a > 0.0 || problem.edges[inc.edge].hamiltonian.coercive;
      rep.entries.push_back({"boundary_elliptic_or_coercive", loc, ok, a, {{"a", a}}});
      continue;
    }
    const KirchhoffCondition& F = problem.kirchhoff_at(v);
    const std::size_t N = F.arity;

    ValidationEntry mono{"F_monotone", loc, true, std::numeric_limits<double>::infinity(), nlohmann::json::object()};
    for (int trial = 0; trial < 400; ++trial) {
      double s = U(rng), r = s + Upos(rng);
      std::vector<double> q(N), p(N);
      for (std::size_t i = 0; i < N; ++i) {
        q[i] = U(rng);
        p[i] = q[i] - (trial % 2 ? Upos(rng) : 0.0);
      }
      bool strict_needed = false;
      for (std::size_t i = 0; i < N; ++i) strict_needed |= p[i] < q[i];
      double d = F(r, p) - F(s, q);
      double margin = d;
      bool ok = strict_needed ? d > 0 : d >= -rel;
      mono.margin = std::min(mono.margin, margin);
      if (!ok && mono.passed) {
        mono.passed = false;
        mono.witness = {{"r", r}, {"p", p}, {"s", s}, {"q", q}};
      }
    }
    rep.entries.push_back(mono);

    const double M = 1e8;
    ValidationEntry co{"F_coercive_minus", loc, true, std::numeric_limits<double>::infinity(), nlohmann::json::object()};
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<double> p(N, 0.0);
      p[i] = -M;
      double val = F(0.0, p);
      co.margin = std::min(co.margin, val);
      if (!(val > 1e3)) {
        co.passed = false;
        co.witness = {{"index", i}, {"F", val}};
      }
    }
    rep.entries.push_back(co);

    ValidationEntry ex{"F_existence_plus", loc, false, -std::numeric_limits<double>::infinity(), nlohmann::json::object()};
    std::vector<std::size_t> good;
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<double> p(N, 0.0);
      p[i] = M;
      double val = F(0.0, p);
      if (val < -1e3) good.push_back(i);
      ex.margin = std::max(ex.margin, -val);
    }
    ex.passed = !good.empty() && F.existence_coercive;
    ex.witness = {{"indices", good}};
    rep.entries.push_back(ex);

    for (std::size_t e : degenerate_set(problem, v)) {
      bool ok = problem.edges[e].hamiltonian.coercive;
      rep.entries.push_back({"degenerate_edge_coercive", loc, ok, 0.0, {{"edge", net.edge(e).id}}});
    }
  }
  return rep;
}

}  // namespace knet
