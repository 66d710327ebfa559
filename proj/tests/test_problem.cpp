#include <catch_amalgamated.hpp>

#include <random>

#include "knet/errors.hpp"
#include "knet/problem.hpp"
#include "helpers.hpp"

using namespace knet;
using Catch::Matchers::WithinAbs;

namespace {

const ValidationEntry* find_entry(const ValidationReport& rep, const std::string& name) {
  for (const auto& e : rep.entries)
    if (e.assumption == name) return &e;
  return nullptr;
}

double F(const KirchhoffCondition& k, double r, std::vector<double> p) { return k(r, p); }

}  // namespace

TEST_CASE("kirchhoff examples") {
  auto classical = make_kirchhoff(KirchhoffFamily::classical, 3, {});
  CHECK(F(classical, 0.7, {1, 1, 1}) == -3.0);
  CHECK(F(classical, -2.0, {-1, 0, 1}) == 0.0);

  KirchhoffParams pm;
  pm.alpha = {1.0};
  pm.beta = {1.0};
  auto split = make_kirchhoff(KirchhoffFamily::pm_split, 2, pm);
  CHECK(F(split, 0.0, {-2, 3}) == -1.0);

  KirchhoffParams bad;
  bad.alpha = {1.0, -1.0};
  CHECK_THROWS_MATCHES(make_kirchhoff(KirchhoffFamily::affine, 2, bad), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::InvalidCoefficientSign;
                       }));
  KirchhoffParams neg0;
  neg0.alpha0 = -0.1;
  CHECK_THROWS_AS(make_kirchhoff(KirchhoffFamily::affine, 2, neg0), Error);
}

TEST_CASE("kirchhoff families are monotone and strictly decreasing along p") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-5.0, 5.0), P(0.0, 3.0);
  KirchhoffParams aff;
  aff.alpha0 = 0.5;
  aff.alpha = {1.0, 2.0, 0.5};
  aff.B = 0.3;
  KirchhoffParams pm;
  pm.alpha0 = 0.2;
  pm.alpha = {1.0, 3.0, 0.5};
  pm.beta = {2.0, 0.25, 1.0};
  pm.B = -1.0;
  std::vector<std::pair<KirchhoffCondition, double>> fams{
      {make_kirchhoff(KirchhoffFamily::classical, 3, {}), 1.0},
      {make_kirchhoff(KirchhoffFamily::affine, 3, aff), 0.5},
      {make_kirchhoff(KirchhoffFamily::pm_split, 3, pm), 0.25}};
  for (const auto& [k, min_alpha] : fams) {
    for (int i = 0; i < 2000; ++i) {
      double s = U(rng), r = s + P(rng);
      std::vector<double> q{U(rng), U(rng), U(rng)}, p = q;
      for (auto& x : p) x -= P(rng);
      CHECK(k(r, p) >= k(s, q));
      double c = P(rng) + 1e-3;
      std::vector<double> shifted = q;
      for (auto& x : shifted) x -= c;
      CHECK(k(s, shifted) - k(s, q) >= c * min_alpha * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("degenerate set") {
  auto net = test::net_of(star_doc({1.0, 1.0, 1.0}));
  auto zero = test::problem_of(test::eikonal_problem(0.0, 0.0), net);
  CHECK(degenerate_set(*zero, 0) == std::vector<std::size_t>{0, 1, 2});
  auto one = test::problem_of(test::eikonal_problem(1.0, 0.0), net);
  CHECK(degenerate_set(*one, 0).empty());
  CHECK_THROWS_AS(degenerate_set(*one, 1), Error);
}

TEST_CASE("degenerate set does not depend on edge orientation") {
  // the same star with the center carrying the largest id flips every edge
  nlohmann::json flipped{{"vertices", {{{"id", 9}}, {{"id", 1}}, {{"id", 2}}, {{"id", 3}}}},
                         {"edges", {{{"id", 0}, {"from", 9}, {"to", 1}, {"length", 1.0}},
                                    {{"id", 1}, {"from", 2}, {"to", 9}, {"length", 1.0}},
                                    {{"id", 2}, {"from", 9}, {"to", 3}, {"length", 1.0}}}}};
  for (int center : {0, 9}) {
    nlohmann::json netdoc = center == 0 ? star_doc({1.0, 1.0, 1.0}) : flipped;
    auto net = test::net_of(netdoc);
    auto doc = test::eikonal_problem(0.0, 0.0);
    doc["edge_overrides"] = {{{"edge", 1}, {"diffusion", {{"type", "linear_vanish"}, {"slope", 1.0}, {"vertex", center}}}},
                             {{"edge", 2}, {"diffusion", {{"type", "constant"}, {"a", 0.4}}}}};
    auto pb = test::problem_of(doc, net);
    auto D = degenerate_set(*pb, net->vertex_index(center));
    REQUIRE(D.size() == 2);
    CHECK(net->edge(D[0]).id == 0);
    CHECK(net->edge(D[1]).id == 1);
    // nonzero away from the vertex
    std::size_t e1 = net->edge_index(1);
    double far = pb->vertex_parameter(e1, net->vertex_index(2));
    CHECK_THAT(pb->edges[e1].diffusion.a(far), WithinAbs(1.0, 1e-14));
  }
}

TEST_CASE("validation report") {
  auto net = test::net_of(star_doc({1.0, 1.0, 1.0}));
  auto good = test::problem_of(test::eikonal_problem(0.0, 0.0), net);
  ValidationReport rep = validate_problem(*good);
  CHECK(rep.all_passed());
  REQUIRE(find_entry(rep, "F_monotone"));

  auto doc = test::eikonal_problem(0.0, 0.0);
  doc["edges"]["hamiltonian"] = {{"type", "quadratic"}, {"c", 1.0}, {"f", 0.0}};
  auto quad = test::problem_of(doc, net);
  ValidationReport qrep = validate_problem(*quad);
  const ValidationEntry* lp = find_entry(qrep, "H_lipschitz_p");
  REQUIRE(lp);
  CHECK_FALSE(lp->passed);
  CHECK(lp->witness.contains("p"));
  CHECK_FALSE(qrep.all_passed());
}

TEST_CASE("problem documents") {
  auto net = test::net_of(star_doc({1.0, 2.0}));
  auto doc = test::eikonal_problem(0.0, 0.0);
  doc["dirichlet_overrides"] = {{{"vertex", 2}, {"value", 3.5}}};
  doc["kirchhoff_overrides"] = {{{"vertex", 0}, {"family", "affine"}, {"alpha0", 1.0}, {"alpha", {1.0, 2.0}}, {"B", 0.5}}};
  auto pb = test::problem_of(doc, net);
  CHECK(pb->dirichlet_at(net->vertex_index(1)) == 0.0);
  CHECK(pb->dirichlet_at(net->vertex_index(2)) == 3.5);
  CHECK(pb->kirchhoff_at(0).alpha == std::vector<double>{1.0, 2.0});
  CHECK(pb->kirchhoff_at(0).B == 0.5);

  const Hamiltonian& H = pb->edges[0].hamiltonian;
  CHECK(H(0.3, -2.0) == 1.0);
  CHECK(H.coercive);
  CHECK(H.c_h == 1.0);

  auto missing = doc;
  missing["edges"].erase("hamiltonian");
  CHECK_THROWS_AS(problem_from_json(missing, net), Error);
  auto bad_type = doc;
  bad_type["edges"]["hamiltonian"]["type"] = "cubic";
  CHECK_THROWS_AS(problem_from_json(bad_type, net), Error);
  auto bad_lambda = doc;
  bad_lambda["lambda"] = 0.0;
  CHECK_THROWS_AS(problem_from_json(bad_lambda, net), Error);
}

TEST_CASE("lower envelopes of built-in Hamiltonians") {
  Hamiltonian eik = make_eikonal(2.0, Polynomial{{1.0}}, 1.0);
  // inf over q <= p of 2|q| - 1
  CHECK(eik.lower_left(0.0, 0.5).value == -1.0);
  CHECK(eik.lower_left(0.0, -0.5).value == 0.0);
  CHECK(eik.lower_right(0.0, -0.5).value == -1.0);
  CHECK(eik.lower_right(0.0, 0.5).value == 0.0);

  // nonconvex: down, up, down, up
  Hamiltonian pl = make_piecewise_linear({{-1.0, 0.0}, {0.0, 1.0}, {1.0, -1.0}, {2.0, 3.0}, {-2.0, 2.0}},
                                         Polynomial{{0.0}}, 1.0);
  REQUIRE(pl.coercive);
  CHECK_FALSE(*pl.convex);
  CHECK(pl(0.0, 0.5) == 0.0);
  CHECK(pl(0.0, 3.0) == 7.0);
  CHECK(pl(0.0, -3.0) == 4.0);
  CHECK(pl.lower_left(0.0, -0.5).value == 0.0);
  CHECK(pl.lower_left(0.0, 1.5).value == -1.0);
  CHECK(pl.lower_right(0.0, -1.5).value == -1.0);
  CHECK(pl.lower_right(0.0, 1.5).value == 1.0);
  Hamiltonian flat = make_piecewise_linear({{0.0, 0.0}, {1.0, 1.0}}, Polynomial{{0.0}}, 1.0);
  CHECK_FALSE(flat.coercive);
  CHECK_THROWS_AS(flat.lower_left(0.0, 0.0), Error);
}
