#pragma once

// Test-only oracles, independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "hyperreg/hypergraph.hpp"
#include "hyperreg/tensor.hpp"
#include "hyperreg/util.hpp"

namespace oracles {

using hyperreg::Edge;
using hyperreg::RGraph;
using hyperreg::SymTensor;

// plain odometer over all vertex maps, no pruning
inline double naive_hom(const RGraph& h, const SymTensor& s) {
  int n = s.n();
  int v = h.num_vertices;
  std::vector<int> phi(v, 0);
  double total = 0.0;
  while (true) {
    double prod = 1.0;
    for (const auto& e : h.edges) {
      std::vector<int> img;
      for (int u : e) img.push_back(phi[u]);
      prod *= s.at(img);
    }
    total += prod;
    int i = 0;
    while (i < v && phi[i] == n - 1) phi[i++] = 0;
    if (i == v) break;
    ++phi[i];
  }
  return total;
}

inline double naive_lin_form(const SymTensor& a, const SymTensor& b) {
  int n = a.n(), r = a.r();
  std::vector<int> tuple(r, 0);
  double total = 0.0;
  while (true) {
    total += a.at(tuple) * b.at(tuple);
    int i = 0;
    while (i < r && tuple[i] == n - 1) tuple[i++] = 0;
    if (i == r) break;
    ++tuple[i];
  }
  return total;
}

inline double naive_relent(double p, const SymTensor& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.num_subsets(); ++i) {
    double x = q.get_by_rank(i);
    if (x > 0.0) s += x * std::log(x / p);
    if (x < 1.0) s += (1.0 - x) * std::log((1.0 - x) / (1.0 - p));
  }
  return s;
}

// normalized matrix cut norm by full enumeration of index pairs (r = 2)
inline double cut_norm_enum(const SymTensor& m) {
  int n = m.n();
  double best = 0.0;
  for (int imask = 1; imask < (1 << n); ++imask)
    for (int jmask = 1; jmask < (1 << n); ++jmask) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!(imask & (1 << i))) continue;
        for (int j = 0; j < n; ++j) {
          if (!(jmask & (1 << j))) continue;
          if (i == j) continue;
          s += m.get({std::min(i, j), std::max(i, j)});
        }
      }
      best = std::max(best, std::abs(s) / double(n) / double(n));
    }
  return best;
}

// the (|I| v n0)(|J| v n0) matrix norm by full enumeration
inline double matrix_norm_enum(const SymTensor& m, double p, int delta) {
  int n = m.n();
  double n0 = double(n) * hyperreg::int_pow(p, delta - 1);
  double best = 0.0;
  for (int imask = 1; imask < (1 << n); ++imask)
    for (int jmask = 1; jmask < (1 << n); ++jmask) {
      double s = 0.0;
      int isz = 0, jsz = 0;
      for (int i = 0; i < n; ++i) {
        if (!(imask & (1 << i))) continue;
        ++isz;
        for (int j = 0; j < n; ++j) {
          if (!(jmask & (1 << j))) continue;
          if (i == j) continue;
          s += m.get({std::min(i, j), std::max(i, j)});
        }
      }
      for (int j = 0; j < n; ++j)
        if (jmask & (1 << j)) ++jsz;
      double denom = std::max(double(isz), n0) * std::max(double(jsz), n0);
      best = std::max(best, std::abs(s) / denom);
    }
  return best;
}

// degree-sequence formula: max over |I| of the extreme prefix row-sum ratio
inline double star_norm_by_degrees(const SymTensor& m, double p, int delta) {
  int n = m.n();
  double n0 = double(n) * hyperreg::int_pow(p, delta - 1);
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) d[i] += m.get({std::min(i, j), std::max(i, j)}) / double(n);
  std::sort(d.begin(), d.end());
  double best = 0.0;
  double lo = 0.0, hi = 0.0;
  for (int s = 1; s <= n; ++s) {
    hi += d[n - s];
    lo += d[s - 1];
    double denom = std::max(double(s), n0);
    best = std::max({best, std::abs(hi) / denom, std::abs(lo) / denom});
  }
  return best;
}

// binomial closed form for single-edge tails (hom(K_r^r, A) = r! edges(A))
inline double binomial_tail(int n, int r, double p, double delta, bool upper) {
  long long nsub = hyperreg::binom(n, r);
  double fact = 1.0;
  for (int k = 2; k <= r; ++k) fact *= k;
  double target =
      (upper ? (1.0 + delta) : (1.0 - delta)) * p * hyperreg::int_pow(double(n), r);
  double prob = 0.0;
  for (long long k = 0; k <= nsub; ++k) {
    double hom = fact * double(k);
    bool in_event = upper ? (hom >= target) : (hom <= target);
    if (!in_event) continue;
    double logc = 0.0;
    for (long long i = 1; i <= k; ++i)
      logc += std::log(double(nsub - k + i)) - std::log(double(i));
    prob += std::exp(logc + double(k) * std::log(p) + double(nsub - k) * std::log(1.0 - p));
  }
  return prob;
}

// exhaustive E_Q hom(H, A) over every graph on the support (C(n,r) small)
inline double exhaustive_hom_expectation(const RGraph& h, const SymTensor& q) {
  int n = q.n(), r = q.r();
  long long nsub = hyperreg::binom(n, r);
  SymTensor a(n, r);
  double total = 0.0;
  for (unsigned long long mask = 0; mask < (1ull << nsub); ++mask) {
    double w = 1.0;
    for (long long j = 0; j < nsub; ++j) {
      double qv = q.get_by_rank(std::size_t(j));
      bool on = (mask >> j) & 1ull;
      a.set_by_rank(std::size_t(j), on ? 1.0 : 0.0);
      w *= on ? qv : (1.0 - qv);
    }
    if (w > 0.0) total += w * naive_hom(h, a);
  }
  return total;
}

inline SymTensor random_weight_tensor(int n, int r, std::uint64_t seed) {
  hyperreg::Rng rng(seed);
  SymTensor q(n, r);
  for (std::size_t i = 0; i < q.num_subsets(); ++i) q.set_by_rank(i, rng.uniform());
  return q;
}

inline SymTensor random_symmetric_matrix(int n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  hyperreg::Rng rng(seed);
  SymTensor m(n, 2);
  for (std::size_t i = 0; i < m.num_subsets(); ++i)
    m.set_by_rank(i, lo + (hi - lo) * rng.uniform());
  return m;
}

// random connected r-graph with a given edge count (grow by intersecting edges)
inline RGraph random_connected_rgraph(int r, int num_edges, std::uint64_t seed) {
  hyperreg::Rng rng(seed);
  std::vector<Edge> edges;
  std::set<Edge> seen;
  int next_vertex = r;
  Edge first;
  for (int i = 0; i < r; ++i) first.push_back(i);
  edges.push_back(first);
  seen.insert(first);
  int guard = 0;
  while (int(edges.size()) < num_edges && guard++ < 10000) {
    // at least one vertex drawn from the current support keeps it connected
    std::set<int> support;
    for (const auto& e : edges)
      for (int u : e) support.insert(u);
    std::vector<int> pool(support.begin(), support.end());
    std::set<int> cand;
    cand.insert(pool[rng.index(pool.size())]);
    while (int(cand.size()) < r) {
      if (rng.bernoulli(0.5) && !pool.empty())
        cand.insert(pool[rng.index(pool.size())]);
      else
        cand.insert(next_vertex + int(rng.index(std::size_t(r))));
    }
    Edge e(cand.begin(), cand.end());
    if (seen.count(e)) continue;
    seen.insert(e);
    edges.push_back(e);
    for (int u : e) next_vertex = std::max(next_vertex, u + 1);
  }
  // compact the labels
  std::set<int> used;
  for (const auto& e : edges)
    for (int u : e) used.insert(u);
  std::vector<int> remap(next_vertex + r + 1, -1);
  int nv = 0;
  for (int u : used) remap[u] = nv++;
  std::vector<Edge> out;
  for (auto e : edges) {
    for (int& u : e) u = remap[u];
    std::sort(e.begin(), e.end());
    out.push_back(e);
  }
  return RGraph(r, nv, out);
}

// all connected r-graphs with at most max_edges edges, up to isomorphism,
// grown edge by edge with canonical-form dedup
inline std::vector<RGraph> all_connected_rgraphs(int r, int max_edges) {
  std::vector<RGraph> out;
  std::set<std::vector<Edge>> seen;
  std::vector<RGraph> frontier = {hyperreg::single_edge_graph(r)};
  seen.insert(hyperreg::canonical_edges(frontier[0]));
  out.push_back(frontier[0]);
  for (int sz = 2; sz <= max_edges; ++sz) {
    std::vector<RGraph> next;
    for (const auto& g : frontier) {
      // candidate new edges: choose how many old vertices (>=1) and which
      int v = g.num_vertices;
      std::vector<int> pick;
      // iterate over all ways to pick k old vertices and r-k fresh ones
      for (int k = 1; k <= std::min(r, v); ++k) {
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = i;
        while (true) {
          Edge e(idx.begin(), idx.end());
          for (int f = 0; f < r - k; ++f) e.push_back(v + f);
          std::sort(e.begin(), e.end());
          if (!g.has_edge(e)) {
            std::vector<Edge> es = g.edges;
            es.push_back(e);
            RGraph h(r, v + (r - k), es);
            auto canon = hyperreg::canonical_edges(h);
            if (!seen.count(canon)) {
              seen.insert(canon);
              next.push_back(h);
              out.push_back(h);
            }
          }
          int i = k - 1;
          while (i >= 0 && idx[i] == v - k + i) --i;
          if (i < 0) break;
          ++idx[i];
          for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace oracles
