#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hyperreg/delta_prime.hpp"
#include "hyperreg/hypergraph.hpp"
#include "hyperreg/tensor.hpp"
#include "hyperreg/util.hpp"

namespace hyperreg {

/// One nonempty member of a weighted base: a proper subset of the edge, the
/// coordinate positions it occupies under the edge bijection, and its weight.
struct BaseMember {
  Edge verts;                  // subset of the base's edge, sorted
  std::vector<int> positions;  // indices into [r] (sorted edge order)
  int d_b = 0;
};

/// Weighted base (r, e, iota, B, d*, {d_b}); iota is the sorted order of the
/// edge, the empty member is implicit with d_empty = 0.
struct WeightedBase {
  int r = 2;
  Edge edge;  // r vertex labels, sorted
  std::vector<BaseMember> members;
  int d_star = 0;

  void validate() const {
    if (int(edge.size()) != r) throw std::invalid_argument("weighted base: edge size != r");
    for (const auto& m : members) {
      if (m.verts.empty() || int(m.verts.size()) >= r)
        throw std::invalid_argument("weighted base: members must be nonempty proper subsets");
      if (!subset_of(m.verts, edge))
        throw std::invalid_argument("weighted base: member not inside edge");
      if (m.d_b < 0 || m.d_b > d_star)
        throw std::invalid_argument("weighted base: need 0 <= d_b <= d_star");
    }
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = 0; j < members.size(); ++j)
        if (i != j && subset_of(members[i].verts, members[j].verts))
          throw std::invalid_argument("weighted base: members must form an antichain");
  }

  static std::vector<int> positions_of(const Edge& edge, const Edge& verts) {
    std::vector<int> pos;
    for (int v : verts) {
      auto it = std::lower_bound(edge.begin(), edge.end(), v);
      pos.push_back(int(it - edge.begin()));
    }
    return pos;
  }

  static WeightedBase make(int r, Edge edge, std::vector<Edge> member_sets, int d_star,
                           std::vector<int> weights) {
    WeightedBase wb;
    wb.r = r;
    wb.edge = std::move(edge);
    wb.d_star = d_star;
    for (std::size_t i = 0; i < member_sets.size(); ++i) {
      BaseMember m;
      m.verts = std::move(member_sets[i]);
      std::sort(m.verts.begin(), m.verts.end());
      m.positions = positions_of(wb.edge, m.verts);
      m.d_b = weights[i];
      wb.members.push_back(std::move(m));
    }
    wb.validate();
    return wb;
  }
};

/// Matrix specialization (maximal base over {0,1}): d* = 2*delta-2 and
/// d_b = delta-1 recover the (|I| v n0)(|J| v n0) size with n0 = n p^{delta-1}.
inline WeightedBase matrix_base(int delta) {
  return WeightedBase::make(2, {0, 1}, {{0}, {1}}, 2 * delta - 2, {delta - 1, delta - 1});
}

/// Degree-sequence specialization: single factor on the first coordinate,
/// size n(|I| v n0).
inline WeightedBase star_base(int delta) {
  return WeightedBase::make(2, {0, 1}, {{0}}, delta - 1, {0});
}

/// Deg.usual weights for a dominating base over an edge of the host: d* is the
/// edge degree, d_b the b-dominated degree (counted in `weight_host`, which is
/// the host itself for plain counts or H_+ for signed ones).
inline WeightedBase host_weighted_base(const RGraph& weight_host, const DominatingBase& base) {
  int r = int(base.edge.size());
  int d_star = boundary_degree(weight_host, base.edge);
  std::vector<Edge> mems;
  std::vector<int> ws;
  for (const auto& b : base.members) {
    mems.push_back(b);
    ws.push_back(int(dominated_boundary(weight_host, base.edge, b).size()));
  }
  return WeightedBase::make(r, base.edge, std::move(mems), d_star, std::move(ws));
}

/// One weighted base per edge of a host graph (or any finite edge family).
struct BaseSystem {
  std::vector<WeightedBase> bases;
};

/// Default system: the delta-prime-optimal dominating base per edge with
/// Deg.usual weights.
inline BaseSystem default_base_system(const RGraph& h) {
  BaseSystem sys;
  for (const auto& e : h.edges) sys.bases.push_back(host_weighted_base(h, optimal_dominating_base(h, e)));
  return sys;
}

/// Signed-count variant: bases dominate all overlaps of H, weights taken in H_+.
inline BaseSystem signed_base_system(const SignedRGraph& sh) {
  RGraph hplus = sh.positive_part();
  BaseSystem sys;
  for (const auto& e : sh.graph.edges)
    sys.bases.push_back(host_weighted_base(hplus, optimal_dominating_base(sh.graph, e)));
  return sys;
}

/// Maximal-base system (always dominating) with Deg.usual weights.
inline BaseSystem maximal_base_system(const RGraph& h) {
  BaseSystem sys;
  for (const auto& e : h.edges) {
    DominatingBase b;
    b.edge = e;
    for (int skip = 0; skip < h.r; ++skip) {
      Edge m;
      for (int i = 0; i < h.r; ++i)
        if (i != skip) m.push_back(e[i]);
      if (!m.empty()) b.members.push_back(m);
    }
    sys.bases.push_back(host_weighted_base(h, b));
  }
  return sys;
}

// -------- test tensors --------

/// Boolean product tensor: one Boolean factor per nonempty member, composed
/// with the coordinate projections; the empty member contributes the constant
/// one factor.
struct TestTensor {
  WeightedBase base;
  int n = 0;
  // factor[i] is dense over [n]^{|positions_i|}, row-major in position order
  std::vector<std::vector<char>> factors;

  static std::size_t tuple_count(int n, std::size_t arity) {
    std::size_t c = 1;
    for (std::size_t i = 0; i < arity; ++i) c *= std::size_t(n);
    return c;
  }

  static TestTensor zeros(const WeightedBase& wb, int n) {
    TestTensor t;
    t.base = wb;
    t.n = n;
    for (const auto& m : wb.members)
      t.factors.emplace_back(tuple_count(n, m.positions.size()), char(0));
    return t;
  }

  std::size_t factor_support(std::size_t i) const {
    std::size_t c = 0;
    for (char v : factors[i]) c += (v != 0);
    return c;
  }

  bool nonzero() const {
    for (std::size_t i = 0; i < factors.size(); ++i)
      if (factor_support(i) == 0) return false;
    return true;
  }

  /// Evaluate at an ordered tuple (i_1..i_r).
  double at(const std::vector<int>& tuple) const {
    for (std::size_t f = 0; f < factors.size(); ++f) {
      std::size_t code = 0;
      for (int pos : base.members[f].positions) code = code * std::size_t(n) + std::size_t(tuple[pos]);
      if (!factors[f][code]) return 0.0;
    }
    return 1.0;
  }

  DenseTensor to_dense() const {
    DenseTensor d(n, base.r);
    std::vector<int> tuple(base.r, 0);
    for (std::size_t idx = 0; idx < d.data.size(); ++idx) {
      std::size_t rem = idx;
      for (int k = base.r - 1; k >= 0; --k) {
        tuple[k] = int(rem % n);
        rem /= n;
      }
      d.data[idx] = at(tuple);
    }
    return d;
  }

  /// Count of ordered r-tuples where the product equals one.
  double l1() const {
    // members may share coordinates; enumerate unless they are disjoint
    if (members_disjoint()) {
      double c = 1.0;
      std::size_t covered = 0;
      for (std::size_t f = 0; f < factors.size(); ++f) {
        c *= double(factor_support(f));
        covered += base.members[f].positions.size();
      }
      return c * int_pow(double(n), (long long)base.r - (long long)covered);
    }
    double c = 0.0;
    std::vector<int> tuple(base.r, 0);
    std::size_t total = tuple_count(n, base.r);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (int k = base.r - 1; k >= 0; --k) {
        tuple[k] = int(rem % n);
        rem /= n;
      }
      c += at(tuple);
    }
    return c;
  }

  bool members_disjoint() const {
    std::vector<char> seen(base.r, 0);
    for (const auto& m : base.members)
      for (int p : m.positions) {
        if (seen[p]) return false;
        seen[p] = 1;
      }
    return true;
  }
};

/// ||T||_b = n^{r-|b|} p^{d*-d_b} ||theta_b||_1; the empty member gives n^r p^{d*}.
inline double factor_size(const TestTensor& t, int member_index, double p) {
  if (member_index < 0) return int_pow(double(t.n), t.base.r) * int_pow(p, t.base.d_star);
  if (member_index >= int(t.base.members.size()))
    throw std::invalid_argument("factor_size: no such member");
  const auto& m = t.base.members[member_index];
  return int_pow(double(t.n), t.base.r - int(m.positions.size())) *
         int_pow(p, t.base.d_star - m.d_b) * double(t.factor_support(member_index));
}

/// ||T||_B = max(||T||_1, max_b ||T||_b); at least n^r p^{d*}.
inline double test_size(const TestTensor& t, double p) {
  double best = std::max(t.l1(), factor_size(t, -1, p));
  for (int i = 0; i < int(t.base.members.size()); ++i) best = std::max(best, factor_size(t, i, p));
  return best;
}

/// W_{n,p}(B) = min over members (empty one included) of n^{r-|b|} p^{d*-d_b+2}.
inline double growing(const WeightedBase& wb, int n, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("growing: p outside (0,1)");
  double best = int_pow(double(n), wb.r) * int_pow(p, wb.d_star + 2);
  for (const auto& m : wb.members)
    best = std::min(best, int_pow(double(n), wb.r - int(m.positions.size())) *
                              int_pow(p, wb.d_star - m.d_b + 2));
  return best;
}

}  // namespace hyperreg
