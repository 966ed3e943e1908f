#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hyperreg/homomorphism.hpp"
#include "oracles.hpp"

using namespace hyperreg;

namespace {

double naive_multilinear(const EdgeTensorAssignment& assign) {
  int n = assign.per_edge.front().n();
  int v = assign.host.num_vertices;
  std::vector<int> phi(v, 0);
  double total = 0.0;
  while (true) {
    double prod = 1.0;
    for (int ei = 0; ei < assign.host.num_edges(); ++ei) {
      std::vector<int> img;
      for (int u : assign.host.edges[ei]) img.push_back(phi[u]);
      prod *= assign.per_edge[ei].at(img);
    }
    total += prod;
    int i = 0;
    while (i < v && phi[i] == n - 1) phi[i++] = 0;
    if (i == v) break;
    ++phi[i];
  }
  return total;
}

// direct signed count with the distinct-support complement
double naive_signed(const SignedRGraph& sh, const EdgeTensorAssignment& assign) {
  int n = assign.per_edge.front().n();
  SymTensor j = jay(n, sh.graph.r);
  EdgeTensorAssignment tilde;
  tilde.host = assign.host;
  for (std::size_t i = 0; i < assign.per_edge.size(); ++i)
    tilde.per_edge.push_back(sh.sign.at(assign.host.edges[i]) == 1 ? assign.per_edge[i]
                                                                   : j - assign.per_edge[i]);
  return naive_multilinear(tilde);
}

double naive_induced(const RGraph& h, const SymTensor& q) {
  SignedRGraph k = complement_signing(h);
  EdgeTensorAssignment assign;
  assign.host = k.graph;
  assign.per_edge.assign(k.graph.edges.size(), q);
  return naive_signed(k, assign);
}

}  // namespace

TEST_CASE("hom count basics") {
  SymTensor tri = adjacency_tensor(cycle_graph(3), 3);
  CHECK(hom_count(single_edge_graph(2), tri) == doctest::Approx(6.0));
  CHECK(hom_count(single_edge_graph(2), jay(3, 2)) == doctest::Approx(6.0));
  CHECK(t_density(single_edge_graph(2), jay(3, 2)) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("hom count matches the naive loop") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto q = oracles::random_weight_tensor(5, 2, 40 + seed);
    CHECK(hom_count(clique_graph(3, 2), q) ==
          doctest::Approx(oracles::naive_hom(clique_graph(3, 2), q)).epsilon(1e-12));
    CHECK(hom_count(cycle_graph(4), q) ==
          doctest::Approx(oracles::naive_hom(cycle_graph(4), q)).epsilon(1e-12));
  }
  auto q3 = oracles::random_weight_tensor(4, 3, 3);
  CHECK(hom_count(clique_graph(4, 3), q3) ==
        doctest::Approx(oracles::naive_hom(clique_graph(4, 3), q3)).epsilon(1e-12));
}

TEST_CASE("densities") {
  int n = 12;
  double p = 0.37;
  SymTensor pj = constant_tensor(n, 2, p);
  RGraph k3 = clique_graph(3, 2);
  CHECK(tp_density(k3, pj, p) == doctest::Approx(t_density(k3, jay(n, 2))));
  // closed form for the edge density
  auto q = oracles::random_weight_tensor(n, 2, 5);
  double s = 0.0;
  for (std::size_t i = 0; i < q.num_subsets(); ++i) s += q.get_by_rank(i);
  CHECK(t_density(single_edge_graph(2), q) == doctest::Approx(2.0 * s / double(n * n)));
}

TEST_CASE("multilinear count") {
  RGraph p3 = path_graph(2);
  EdgeTensorAssignment assign;
  assign.host = p3;
  assign.per_edge = {oracles::random_weight_tensor(4, 2, 1), oracles::random_weight_tensor(4, 2, 2)};
  CHECK(hom_multilinear(assign) == doctest::Approx(naive_multilinear(assign)).epsilon(1e-12));
  // all tensors equal reduces to the plain count
  EdgeTensorAssignment same;
  same.host = p3;
  same.per_edge.assign(2, assign.per_edge[0]);
  CHECK(hom_multilinear(same) == doctest::Approx(hom_count(p3, assign.per_edge[0])));
  // one zero tensor kills the count
  EdgeTensorAssignment zeroed = assign;
  zeroed.per_edge[1] = SymTensor(4, 2);
  CHECK(hom_multilinear(zeroed) == 0.0);
  EdgeTensorAssignment bad = assign;
  bad.per_edge.pop_back();
  CHECK_THROWS(hom_multilinear(bad));
}

TEST_CASE("signed counts") {
  // one positive and one negative edge on disjoint pairs
  RGraph m2 = matching_graph(2, 2);
  std::map<Edge, int> sgn{{m2.edges[0], 1}, {m2.edges[1], -1}};
  SignedRGraph sh(m2, sgn);
  int n = 5;
  double qv = 0.3;
  SymTensor q = constant_tensor(n, 2, qv);
  double expect = (qv * n * (n - 1)) * ((1 - qv) * n * (n - 1));
  CHECK(hom_signed(sh, q) == doctest::Approx(expect).epsilon(1e-12));
  // all-positive signing reduces to the multilinear count
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto qq = oracles::random_weight_tensor(4, 2, 600 + seed);
    auto sp = all_positive(cycle_graph(4));
    CHECK(hom_signed(sp, qq) == doctest::Approx(hom_count(cycle_graph(4), qq)).epsilon(1e-12));
  }
  // tilde identity against the naive evaluation on random mixed signings
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng rng(900 + seed);
    RGraph h = cycle_graph(4);
    std::map<Edge, int> s;
    for (const auto& e : h.edges) s[e] = rng.bernoulli(0.5) ? 1 : -1;
    SignedRGraph sh2(h, s);
    EdgeTensorAssignment assign;
    assign.host = h;
    for (int i = 0; i < h.num_edges(); ++i)
      assign.per_edge.push_back(oracles::random_weight_tensor(4, 2, 7000 + 10 * seed + i));
    CHECK(hom_signed(sh2, assign) == doctest::Approx(naive_signed(sh2, assign)).epsilon(1e-12));
  }
}

TEST_CASE("induced counts") {
  // complete H has no complement factors
  RGraph k3 = clique_graph(3, 2);
  auto q = oracles::random_weight_tensor(5, 2, 31);
  CHECK(induced_hom(k3, q) == doctest::Approx(hom_count(k3, q)).epsilon(1e-12));
  CHECK(induced_hom(single_edge_graph(2), SymTensor(4, 2)) == 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto qq = oracles::random_weight_tensor(4, 2, 1200 + seed);
    RGraph p3 = path_graph(2);
    CHECK(induced_hom(p3, qq) == doctest::Approx(naive_induced(p3, qq)).epsilon(1e-12));
  }
}

TEST_CASE("counting constant recursion") {
  CHECK(counting_constant(0, 2) == 0.0);
  CHECK(counting_constant(1, 2) == 4.0);
  CHECK(counting_constant(2, 2) == 40.0);
  CHECK(counting_constant(1, 3) == 8.0);
  CHECK_THROWS(counting_constant(-1, 2));
}

TEST_CASE("disjoint unions multiply") {
  RGraph h1 = cycle_graph(3);
  // embed a disjoint copy of an edge alongside the triangle
  RGraph both(2, 5, {{0, 1}, {1, 2}, {0, 2}, {3, 4}});
  auto q = oracles::random_weight_tensor(5, 2, 8);
  CHECK(t_density(both, q) ==
        doctest::Approx(t_density(h1, q) * t_density(single_edge_graph(2), q)).epsilon(1e-12));
}

TEST_CASE("monotonicity of plain counts and not of induced ones") {
  RGraph p3 = path_graph(2);
  auto q = oracles::random_weight_tensor(4, 2, 21);
  double before = hom_count(p3, q);
  double ind_before = induced_hom(p3, q);
  SymTensor bumped = q;
  bumped.set({0, 1}, std::min(1.0, q.get({0, 1}) + 0.2));
  CHECK(hom_count(p3, bumped) >= before - 1e-12);
  // a dense weight drops the induced count through the complement factors
  SymTensor high = constant_tensor(4, 2, 0.95);
  SymTensor higher = constant_tensor(4, 2, 1.0);
  CHECK(induced_hom(p3, higher) < induced_hom(p3, high));
  (void)ind_before;
}

TEST_CASE("counting lemma trials") {
  RGraph k3 = clique_graph(3, 2);
  auto sys = default_base_system(k3);
  auto rep = counting_lemma_check(k3, sys, 8, 0.5, 0.15, 50, 99);
  CHECK(rep.violations == 0);
  CHECK(rep.max_ratio <= 1.0 + 1e-12);
  auto adv = counting_adversarial_check(k3, sys, 8, 0.5, 123);
  CHECK(adv.pass);
  CHECK(adv.distance > 0.0);
}

TEST_CASE("finner inequality") {
  RGraph k3 = clique_graph(3, 2);
  auto repj = finner_bound_check(k3, jay(6, 2));
  CHECK(repj.pass);
  CHECK(repj.rhs <= 1.0 + 1e-12);
  auto repc = finner_bound_check(k3, constant_tensor(6, 2, 0.4));
  CHECK(repc.pass);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RGraph h = (seed % 3 == 0) ? clique_graph(3, 2)
                               : (seed % 3 == 1 ? cycle_graph(4) : clique_graph(4, 3));
    auto z = oracles::random_weight_tensor(6, h.r, 5000 + seed);
    CHECK(finner_bound_check(h, z).pass);
  }
  SymTensor neg(4, 2);
  neg.set({0, 1}, -0.5);
  CHECK_THROWS(finner_bound_check(k3, neg));
}

TEST_CASE("expected counts under the tilted measure") {
  // single edge: E hom = r! * sum Q
  auto q = oracles::random_weight_tensor(5, 2, 61);
  double s = 0.0;
  for (std::size_t i = 0; i < q.num_subsets(); ++i) s += q.get_by_rank(i);
  CHECK(quotient_hom_expectation(single_edge_graph(2), q) == doctest::Approx(2.0 * s));
  // exhaustive average over all graphs on the support
  RGraph p3 = path_graph(2);
  SymTensor qq = constant_tensor(4, 2, 0.3);
  CHECK(quotient_hom_expectation(p3, qq) ==
        doctest::Approx(oracles::exhaustive_hom_expectation(p3, qq)).epsilon(1e-10));
  auto qr = oracles::random_weight_tensor(4, 2, 62);
  CHECK(quotient_hom_expectation(p3, qr) ==
        doctest::Approx(oracles::exhaustive_hom_expectation(p3, qr)).epsilon(1e-10));
  // lower bound by the deterministic count
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto qs = oracles::random_weight_tensor(5, 2, 70 + seed);
    CHECK(quotient_hom_expectation(p3, qs) >= hom_count(p3, qs) - 1e-9);
  }
  CHECK_THROWS(quotient_hom_expectation(clique_graph(11, 2), qq));
}

TEST_CASE("sidorenko candidate search") {
  auto edge_rep = is_sidorenko_candidate(single_edge_graph(2), 5, 60, 1);
  CHECK(!edge_rep.violation_found);
  auto c4_rep = is_sidorenko_candidate(cycle_graph(4), 5, 200, 2);
  CHECK(!c4_rep.violation_found);
  auto k3_rep = is_sidorenko_candidate(cycle_graph(3), 6, 300, 3);
  CHECK(k3_rep.violation_found);
}
