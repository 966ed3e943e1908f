#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "hyperreg/hypergraph.hpp"
#include "hyperreg/util.hpp"

namespace hyperreg {

/// Antichain of proper subsets of an edge (the empty set is always a member)
/// covering every overlap of the edge with the rest of the host graph.
struct DominatingBase {
  Edge edge;
  std::vector<Edge> members;  // nonempty members only; empty set implicit

  bool dominates(const RGraph& g) const {
    for (const auto& e2 : g.edges) {
      if (e2 == edge) continue;
      Edge ov = set_intersection(edge, e2);
      if (ov.empty()) continue;
      bool covered = false;
      for (const auto& b : members)
        if (subset_of(ov, b)) {
          covered = true;
          break;
        }
      if (!covered) return false;
    }
    return true;
  }

  bool is_antichain() const {
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = 0; j < members.size(); ++j)
        if (i != j && subset_of(members[i], members[j])) return false;
    return true;
  }
};

/// Per-edge cost delta'_b(e): (d(e)+2)/r for b = empty, else (d(e\b)+1)/|e\b|.
inline Rational delta_prime_member_cost(const RGraph& g, const Edge& e, const Edge& b) {
  if (b.empty()) return Rational(boundary_degree(g, e) + 2, g.r);
  Edge rest = set_difference(e, b);
  if (rest.empty()) throw std::invalid_argument("delta_prime_member_cost: member not proper");
  return Rational(boundary_degree(g, rest) + 1, int(rest.size()));
}

inline Rational delta_prime_base_cost(const RGraph& g, const DominatingBase& base) {
  Rational worst = delta_prime_member_cost(g, base.edge, {});
  for (const auto& b : base.members) worst = std::max(worst, delta_prime_member_cost(g, base.edge, b));
  return worst;
}

struct DeltaPrimeCertificate {
  Rational value;
  std::vector<std::pair<DominatingBase, Rational>> per_edge;  // aligned with g.edges
};

namespace detail {

inline std::vector<Edge> proper_subsets_containing(const Edge& e, const Edge& ov) {
  // nonempty proper subsets b of e with ov included
  std::vector<Edge> out;
  Edge rest = set_difference(e, ov);
  int m = int(rest.size());
  for (int mask = 0; mask < (1 << m); ++mask) {
    Edge b = ov;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) b.push_back(rest[i]);
    std::sort(b.begin(), b.end());
    if (b.size() == e.size() || b.empty()) continue;
    out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<Edge> distinct_overlaps(const RGraph& g, const Edge& e) {
  std::set<Edge> ovs;
  for (const auto& e2 : g.edges) {
    if (e2 == e) continue;
    Edge ov = set_intersection(e, e2);
    if (!ov.empty()) ovs.insert(std::move(ov));
  }
  return std::vector<Edge>(ovs.begin(), ovs.end());
}

inline std::vector<Edge> antichain_reduce(std::vector<Edge> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  std::vector<Edge> kept;
  for (const auto& b : members) {
    bool maximal = true;
    for (const auto& c : members)
      if (b != c && subset_of(b, c)) {
        maximal = false;
        break;
      }
    if (maximal) kept.push_back(b);
  }
  return kept;
}

}  // namespace detail

/// Per-overlap greedy: cover each overlap by its cheapest proper superset,
/// then keep the maximal members. The cost of a member depends only on the
/// member, and replacing a member by a superset it sits inside never raises
/// the worst cost, so this attains the minimum over all dominating bases.
inline DominatingBase optimal_dominating_base(const RGraph& g, const Edge& e) {
  DominatingBase base;
  base.edge = e;
  for (const auto& ov : detail::distinct_overlaps(g, e)) {
    Rational best_cost(0);
    Edge best;
    bool have = false;
    for (const auto& b : detail::proper_subsets_containing(e, ov)) {
      Rational c = delta_prime_member_cost(g, e, b);
      if (!have || c < best_cost || (c == best_cost && b < best)) {
        best_cost = c;
        best = b;
        have = true;
      }
    }
    base.members.push_back(best);
  }
  base.members = detail::antichain_reduce(std::move(base.members));
  return base;
}

inline DeltaPrimeCertificate delta_prime(const RGraph& g) {
  if (g.edges.empty()) throw std::invalid_argument("delta_prime: graph has no edges");
  DeltaPrimeCertificate cert;
  cert.value = Rational(0);
  for (const auto& e : g.edges) {
    DominatingBase base = optimal_dominating_base(g, e);
    Rational c = delta_prime_base_cost(g, base);
    cert.value = std::max(cert.value, c);
    cert.per_edge.push_back({std::move(base), c});
  }
  return cert;
}

/// Exhaustive minimum over all dominating antichains; cross-check for the
/// greedy. Exponential in the subset lattice of an edge, fine for small r.
inline DeltaPrimeCertificate delta_prime_exhaustive(const RGraph& g) {
  if (g.edges.empty()) throw std::invalid_argument("delta_prime_exhaustive: graph has no edges");
  DeltaPrimeCertificate cert;
  cert.value = Rational(0);
  for (const auto& e : g.edges) {
    // all nonempty proper subsets of e
    std::vector<Edge> subs;
    for (int mask = 1; mask + 1 < (1 << g.r); ++mask) {
      Edge b;
      for (int i = 0; i < g.r; ++i)
        if (mask & (1 << i)) b.push_back(e[i]);
      subs.push_back(std::move(b));
    }
    int m = int(subs.size());
    if (m > 20) throw std::invalid_argument("delta_prime_exhaustive: uniformity too large");
    DominatingBase best_base;
    Rational best_cost(0);
    bool have = false;
    for (long long mask = 0; mask < (1LL << m); ++mask) {
      DominatingBase cand;
      cand.edge = e;
      for (int i = 0; i < m; ++i)
        if (mask & (1LL << i)) cand.members.push_back(subs[i]);
      if (!cand.is_antichain()) continue;
      if (!cand.dominates(g)) continue;
      Rational c = delta_prime_base_cost(g, cand);
      if (!have || c < best_cost) {
        best_cost = c;
        best_base = std::move(cand);
        have = true;
      }
    }
    cert.value = std::max(cert.value, best_cost);
    cert.per_edge.push_back({std::move(best_base), best_cost});
  }
  return cert;
}

}  // namespace hyperreg
