#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperreg/base.hpp"
#include "hyperreg/dual_norm.hpp"
#include "hyperreg/hypergraph.hpp"
#include "hyperreg/tensor.hpp"
#include "hyperreg/util.hpp"

namespace hyperreg {

/// One symmetric tensor per edge of a host graph, all of one shape.
struct EdgeTensorAssignment {
  RGraph host;
  std::vector<SymTensor> per_edge;  // aligned with host.edges

  void validate() const {
    if (per_edge.size() != host.edges.size())
      throw std::invalid_argument("edge assignment: one tensor per edge required");
    for (const auto& t : per_edge)
      if (t.n() != per_edge.front().n() || t.r() != host.r)
        throw std::invalid_argument("edge assignment: shapes disagree");
  }
};

namespace homdetail {

// Sum over vertex maps of the per-edge factor product; each edge is evaluated
// once its last vertex is assigned, and zero factors cut the branch.
inline double hom_generic(const RGraph& h, int n,
                          const std::function<double(int edge_idx, const std::vector<int>&)>& factor) {
  int v = h.num_vertices;
  std::vector<std::vector<int>> close_at(v);  // edge indices completed at each vertex
  for (int ei = 0; ei < h.num_edges(); ++ei) close_at[h.edges[ei].back()].push_back(ei);
  std::vector<int> phi(v, 0);
  double total = 0.0;
  std::function<void(int, double)> rec = [&](int vert, double acc) {
    if (vert == v) {
      total += acc;
      return;
    }
    for (int x = 0; x < n; ++x) {
      phi[vert] = x;
      double a = acc;
      bool dead = false;
      for (int ei : close_at[vert]) {
        a *= factor(ei, phi);
        if (a == 0.0) {
          dead = true;
          break;
        }
      }
      if (!dead) rec(vert + 1, a);
    }
  };
  rec(0, 1.0);
  return total;
}

// allocation-free sum over vertex maps for a per-edge tensor lookup
inline double hom_tensor_family(const RGraph& h, int n,
                                const std::vector<const SymTensor*>& per_edge) {
  int v = h.num_vertices;
  int r = h.r;
  std::vector<std::vector<int>> close_at(v);
  for (int ei = 0; ei < h.num_edges(); ++ei) close_at[h.edges[ei].back()].push_back(ei);
  std::vector<int> phi(v, 0);
  int img[12];
  double total = 0.0;
  std::function<void(int, double)> rec = [&](int vert, double acc) {
    if (vert == v) {
      total += acc;
      return;
    }
    for (int x = 0; x < n; ++x) {
      phi[vert] = x;
      double a = acc;
      bool dead = false;
      for (int ei : close_at[vert]) {
        const Edge& e = h.edges[ei];
        for (int k = 0; k < r; ++k) img[k] = phi[e[k]];
        a *= per_edge[ei]->at_tuple(img, r);
        if (a == 0.0) {
          dead = true;
          break;
        }
      }
      if (!dead) rec(vert + 1, a);
    }
  };
  rec(0, 1.0);
  return total;
}

inline std::vector<int> edge_image(const Edge& e, const std::vector<int>& phi) {
  std::vector<int> img;
  img.reserve(e.size());
  for (int u : e) img.push_back(phi[u]);
  return img;
}

// drop isolated vertices, relabelling densely; returns the core and the count
// of dropped vertices
inline std::pair<RGraph, int> support_core(const RGraph& h) {
  std::vector<int> remap(h.num_vertices, -1);
  int next = 0;
  for (const auto& e : h.edges)
    for (int u : e)
      if (remap[u] < 0) remap[u] = 1;
  for (int u = 0; u < h.num_vertices; ++u)
    if (remap[u] == 1) remap[u] = next++;
  std::vector<Edge> es;
  for (const auto& e : h.edges) {
    Edge f;
    for (int u : e) f.push_back(remap[u]);
    std::sort(f.begin(), f.end());
    es.push_back(std::move(f));
  }
  return {RGraph(h.r, next, std::move(es)), h.num_vertices - next};
}

}  // namespace homdetail

/// hom(H, S): sum over all vertex maps of the product of S over edge images,
/// vanishing on maps that hit an edge non-injectively.
inline double hom_count(const RGraph& h, const SymTensor& s) {
  if (h.r != s.r()) throw std::invalid_argument("hom_count: uniformity mismatch");
  auto [core, iso] = homdetail::support_core(h);
  std::vector<const SymTensor*> per_edge(core.edges.size(), &s);
  double val = homdetail::hom_tensor_family(core, s.n(), per_edge);
  return val * int_pow(double(s.n()), iso);
}

inline double t_density(const RGraph& h, const SymTensor& s) {
  return hom_count(h, s) / int_pow(double(s.n()), h.num_vertices);
}

inline double tp_density(const RGraph& h, const SymTensor& s, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("tp_density: p must be positive");
  return t_density(h, s) / int_pow(p, h.num_edges());
}

/// Multilinear count: an independent tensor per edge.
inline double hom_multilinear(const EdgeTensorAssignment& assign) {
  assign.validate();
  int n = assign.per_edge.empty() ? 1 : assign.per_edge.front().n();
  std::vector<const SymTensor*> per_edge;
  for (const auto& t : assign.per_edge) per_edge.push_back(&t);
  return homdetail::hom_tensor_family(assign.host, n, per_edge);
}

/// Tilde transform of a per-edge family under a signing: S on positive edges,
/// J - S on negative ones (so degenerate tuples vanish on both signs).
inline EdgeTensorAssignment tilde_transform(const SignedRGraph& sh,
                                            const EdgeTensorAssignment& assign) {
  assign.validate();
  EdgeTensorAssignment out;
  out.host = assign.host;
  SymTensor j = jay(assign.per_edge.front().n(), sh.graph.r);
  for (std::size_t i = 0; i < assign.per_edge.size(); ++i) {
    if (sh.sign.at(assign.host.edges[i]) == 1)
      out.per_edge.push_back(assign.per_edge[i]);
    else
      out.per_edge.push_back(j - assign.per_edge[i]);
  }
  return out;
}

/// Signed count hom((H,xi), S): positive edges contribute S, negative ones 1-S
/// in the distinct-support sense.
inline double hom_signed(const SignedRGraph& sh, const EdgeTensorAssignment& assign) {
  return hom_multilinear(tilde_transform(sh, assign));
}

inline double hom_signed(const SignedRGraph& sh, const SymTensor& s) {
  EdgeTensorAssignment assign;
  assign.host = sh.graph;
  assign.per_edge.assign(sh.graph.edges.size(), s);
  return hom_signed(sh, assign);
}

/// Complete-complement signing of H on its own vertex set.
inline SignedRGraph complement_signing(const RGraph& h) {
  RGraph complete = clique_graph(h.num_vertices, h.r);
  std::map<Edge, int> sign;
  for (const auto& e : complete.edges) sign[e] = h.has_edge(e) ? 1 : -1;
  return SignedRGraph(std::move(complete), std::move(sign));
}

/// Induced count: edges of H contribute Q, the non-edges over V(H) contribute
/// 1-Q; equals the signed count of the complete graph with the complement
/// signing.
inline double induced_hom(const RGraph& h, const SymTensor& q) {
  if (h.num_vertices < h.r) throw std::invalid_argument("induced_hom: need v(H) >= r");
  return hom_signed(complement_signing(h), q);
}

/// C(0,r) = 0, C(m,r) = m 2^r (1 + C(m-1,r)).
inline double counting_constant(int m, int r) {
  if (m < 0) throw std::invalid_argument("counting_constant: m must be nonnegative");
  double c = 0.0;
  double two_r = int_pow(2.0, r);
  for (int i = 1; i <= m; ++i) c = double(i) * two_r * (1.0 + c);
  return c;
}

/// Proper subgraphs as edge subsets (vertex set fixed; t_p ignores isolated
/// vertices).
inline std::vector<RGraph> proper_edge_subgraphs(const RGraph& h) {
  std::vector<RGraph> out;
  int m = h.num_edges();
  if (m > 20) throw std::invalid_argument("proper_edge_subgraphs: too many edges");
  for (int mask = 0; mask + 1 < (1 << m); ++mask) {
    std::vector<Edge> es;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) es.push_back(h.edges[i]);
    out.emplace_back(h.r, h.num_vertices, std::move(es));
  }
  return out;
}

/// Crude subgraph-density bound: max over proper subgraphs of t_p, floored at
/// one as the counting lemma requires.
inline double crude_subgraph_bound(const RGraph& h, const SymTensor& a, double p) {
  double best = 1.0;
  for (const auto& f : proper_edge_subgraphs(h)) {
    if (f.edges.empty()) continue;
    best = std::max(best, tp_density(f, a, p));
  }
  return best;
}

struct CountingTrialOutcome {
  double lhs = 0.0;    // |t_p(H,A1) - t_p(H,A2)|
  double bound = 0.0;  // C(e(H),r) * L * d / p
  double distance = 0.0;
  bool pass = true;
};

struct CountingReport {
  long long trials = 0;
  long long violations = 0;
  double max_ratio = 0.0;  // max over trials of lhs / bound
  std::vector<CountingTrialOutcome> worst;
  std::uint64_t seed = 0;
  bool pass() const { return violations == 0; }
};

/// Randomized verification of the counting inequality with the explicit
/// recursion constant: pairs are perturbations of a common mu_p draw, the
/// B*-distance is exact, and any violation flags an implementation bug.
inline CountingReport counting_lemma_check(const RGraph& h, const BaseSystem& sys, int n, double p,
                                           double eps, long long trials, std::uint64_t seed) {
  CountingReport rep;
  rep.trials = trials;
  rep.seed = seed;
  double cconst = counting_constant(h.num_edges(), h.r);
  std::map<std::vector<double>, double> norm_cache;
  long long nsub = binom(n, h.r);
  long long max_flips = std::max<long long>(1, (long long)std::llround(eps * double(nsub)));
  for (long long t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, std::uint64_t(t)));
    SymTensor a1 = sample(ErModel::uniform(n, h.r, p), derive_seed(seed, 500000 + t));
    SymTensor a2 = a1;
    long long flips = 1 + (long long)rng.index(std::size_t(max_flips));
    for (long long f = 0; f < flips; ++f) {
      std::size_t i = rng.index(a2.num_subsets());
      a2.set_by_rank(i, 1.0 - a2.get_by_rank(i));
    }
    SymTensor diff = a1 - a2;
    double d;
    auto it = norm_cache.find(diff.raw());
    if (it != norm_cache.end()) {
      d = it->second;
    } else {
      d = system_norm(diff, sys, p, NormMode::exact).value;
      norm_cache[diff.raw()] = d;
    }
    CountingTrialOutcome o;
    o.distance = d;
    o.lhs = std::abs(tp_density(h, a1, p) - tp_density(h, a2, p));
    double big_l = crude_subgraph_bound(h, a1, p);
    o.bound = cconst * big_l * d / p;
    o.pass = o.lhs <= o.bound + 1e-12;
    if (!o.pass) ++rep.violations;
    double ratio = o.bound > 0 ? o.lhs / o.bound : (o.lhs > 0 ? 1e300 : 0.0);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (!o.pass || rep.worst.size() < 3) rep.worst.push_back(o);
  }
  return rep;
}

/// The localization pair: two samples agreeing outside a Theta(np) block, one
/// empty and one full inside it. The distance term blows up in the dual norm,
/// so the inequality must still hold.
inline CountingTrialOutcome counting_adversarial_check(const RGraph& h, const BaseSystem& sys,
                                                       int n, double p, std::uint64_t seed) {
  SymTensor a1 = sample(ErModel::uniform(n, h.r, p), seed);
  SymTensor a2 = a1;
  int block = std::max(h.r, int(std::lround(double(n) * p)));
  for (const auto& sub : SymTensor::enumerate_subsets(n, h.r)) {
    if (sub.back() < block) {
      a1.set(sub, 0.0);
      a2.set(sub, 1.0);
    }
  }
  CountingTrialOutcome o;
  o.distance = system_norm(a1 - a2, sys, p, NormMode::exact).value;
  o.lhs = std::abs(tp_density(h, a1, p) - tp_density(h, a2, p));
  double big_l = crude_subgraph_bound(h, a1, p);
  o.bound = counting_constant(h.num_edges(), h.r) * big_l * o.distance / p;
  o.pass = o.lhs <= o.bound + 1e-12;
  return o;
}

struct FinnerReport {
  double lhs = 0.0;  // n^{-v} hom(H,Z)
  double rhs = 0.0;  // (n^{-r} sum_ordered Z^Delta)^{e/Delta}
  bool pass = true;
};

/// Brascamp-Lieb-type bound on homomorphism counts of nonnegative tensors.
inline FinnerReport finner_bound_check(const RGraph& h, const SymTensor& z) {
  for (std::size_t i = 0; i < z.num_subsets(); ++i)
    if (z.get_by_rank(i) < 0.0) throw std::invalid_argument("finner: tensor must be nonnegative");
  int delta = max_degree(h);
  if (delta < 1) throw std::invalid_argument("finner: need at least one edge");
  FinnerReport rep;
  int n = z.n();
  rep.lhs = hom_count(h, z) / int_pow(double(n), h.num_vertices);
  double fact = 1.0;
  for (int k = 2; k <= h.r; ++k) fact *= k;
  KahanSum s;
  for (std::size_t i = 0; i < z.num_subsets(); ++i) s.add(int_pow(z.get_by_rank(i), delta));
  double mean_pow = fact * s.value() / int_pow(double(n), h.r);
  rep.rhs = std::pow(mean_pow, double(h.num_edges()) / double(delta));
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-12) + 1e-300;
  return rep;
}

/// Exact E_{mu_Q} hom(H, A): group vertex maps by the partition they induce;
/// each partition with every edge split across r blocks contributes the
/// injective count of the quotient image.
inline double quotient_hom_expectation(const RGraph& h, const SymTensor& q, int cap = 10) {
  if (h.num_vertices > cap)
    throw std::invalid_argument("quotient_hom_expectation: vertex count exceeds cap");
  int n = q.n();
  double total = 0.0;
  std::vector<int> assign(h.num_vertices, 0);
  std::function<void(int, int)> rec = [&](int pos, int blocks) {
    if (pos == h.num_vertices) {
      std::set<Edge> im;
      for (const auto& e : h.edges) {
        Edge f;
        for (int u : e) f.push_back(assign[u]);
        std::sort(f.begin(), f.end());
        for (std::size_t i = 0; i + 1 < f.size(); ++i)
          if (f[i] == f[i + 1]) return;
        im.insert(std::move(f));
      }
      // injective homomorphisms of the image
      std::vector<Edge> edges(im.begin(), im.end());
      std::vector<char> used(std::size_t(n), 0);
      std::vector<int> psi(blocks, 0);
      std::vector<std::vector<int>> close_at(blocks);
      for (int ei = 0; ei < int(edges.size()); ++ei) close_at[edges[ei].back()].push_back(ei);
      std::function<void(int, double)> inj = [&](int b, double acc) {
        if (b == blocks) {
          total += acc;
          return;
        }
        for (int x = 0; x < n; ++x) {
          if (used[x]) continue;
          used[x] = 1;
          psi[b] = x;
          double a2 = acc;
          bool dead = false;
          for (int ei : close_at[b]) {
            std::vector<int> img;
            for (int u : edges[ei]) img.push_back(psi[u]);
            a2 *= q.at(img);
            if (a2 == 0.0) {
              dead = true;
              break;
            }
          }
          if (!dead) inj(b + 1, a2);
          used[x] = 0;
        }
      };
      inj(0, 1.0);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      assign[pos] = b;
      rec(pos + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return total;
}

struct SidorenkoSearchReport {
  bool violation_found = false;
  long long trials = 0;
  double worst_gap = 0.0;  // min over trials of t(H,Q) - t(edge,Q)^{e(H)}
  SymTensor counterexample;
  std::uint64_t seed = 0;
};

/// Randomized falsification of the Sidorenko property; advisory only.
inline SidorenkoSearchReport is_sidorenko_candidate(const RGraph& h, int n, long long samples,
                                                    std::uint64_t seed) {
  if (n < h.r) throw std::invalid_argument("is_sidorenko_candidate: need n >= r");
  SidorenkoSearchReport rep;
  rep.trials = samples;
  rep.seed = seed;
  rep.worst_gap = 1e300;
  RGraph edge = single_edge_graph(h.r);
  for (long long t = 0; t < samples; ++t) {
    Rng rng(derive_seed(seed, std::uint64_t(t)));
    SymTensor q(n, h.r);
    int scheme = int(t % 3);
    std::vector<char> side(std::size_t(n), 0);
    if (scheme == 1)
      for (int i = 0; i < n; ++i) side[std::size_t(i)] = char(rng.bernoulli(0.5));
    for (std::size_t i = 0; i < q.num_subsets(); ++i) {
      const Edge& sub = q.subsets()[i];
      if (scheme == 0) {
        q.set_by_rank(i, rng.uniform());
      } else if (scheme == 1) {
        // supported on sets straddling a random bipartition
        bool a = false, b = false;
        for (int v : sub) (side[std::size_t(v)] ? a : b) = true;
        q.set_by_rank(i, (a && b) ? rng.uniform() : 0.0);
      } else {
        q.set_by_rank(i, sub.front() == 0 ? 1.0 : rng.uniform() * 0.3);
      }
    }
    double lhs = t_density(h, q);
    double rhs = std::pow(t_density(edge, q), double(h.num_edges()));
    rep.worst_gap = std::min(rep.worst_gap, lhs - rhs);
    if (lhs < rhs * (1.0 - 1e-9) - 1e-12) {
      rep.violation_found = true;
      rep.counterexample = q;
      break;
    }
  }
  return rep;
}

}  // namespace hyperreg
