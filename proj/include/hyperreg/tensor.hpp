#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hyperreg/hypergraph.hpp"
#include "hyperreg/util.hpp"

namespace hyperreg {

/// Symmetric r-tensor on [n]^r supported on entries with r distinct
/// coordinates. One value per r-subset; ordered access symmetrizes and
/// vanishes on repeated coordinates.
class SymTensor {
 public:
  SymTensor() = default;
  SymTensor(int n, int r) : n_(n), r_(r) {
    if (n < 0 || r < 1) throw std::invalid_argument("sym tensor: bad shape");
    subsets_ = enumerate_subsets(n, r);
    rank_of_ = build_rank_map(n, r);
    vals_.assign(subsets_.size(), 0.0);
  }

  int n() const { return n_; }
  int r() const { return r_; }
  std::size_t num_subsets() const { return subsets_.size(); }
  const std::vector<Edge>& subsets() const { return subsets_; }

  double get(const Edge& sorted_subset) const { return vals_[rank(sorted_subset)]; }
  void set(const Edge& sorted_subset, double v) { vals_[rank(sorted_subset)] = v; }
  double get_by_rank(std::size_t i) const { return vals_[i]; }
  void set_by_rank(std::size_t i, double v) { vals_[i] = v; }

  /// Value at an ordered tuple; 0 when coordinates repeat.
  double at(const std::vector<int>& tuple) const { return at_tuple(tuple.data(), int(tuple.size())); }

  /// Rank of the sorted tuple, or -1 when coordinates repeat. No allocation.
  std::ptrdiff_t tuple_rank(const int* t, int len) const {
    int buf[12];
    for (int i = 0; i < len; ++i) {
      int v = t[i];
      int j = i;
      while (j > 0 && buf[j - 1] > v) {
        buf[j] = buf[j - 1];
        --j;
      }
      buf[j] = v;
    }
    std::size_t code = 0;
    for (int i = 0; i < len; ++i) {
      if (i > 0 && buf[i] == buf[i - 1]) return -1;
      code = code * std::size_t(n_) + std::size_t(buf[i]);
    }
    return std::ptrdiff_t(rank_of_[code]);
  }

  double at_tuple(const int* t, int len) const {
    std::ptrdiff_t r = tuple_rank(t, len);
    return r < 0 ? 0.0 : vals_[std::size_t(r)];
  }

  std::size_t rank(const Edge& sorted_subset) const {
    std::size_t code = 0;
    for (int v : sorted_subset) code = code * std::size_t(n_) + std::size_t(v);
    return rank_of_[code];
  }

  const std::vector<double>& raw() const { return vals_; }

  bool is_boolean() const {
    for (double v : vals_)
      if (v != 0.0 && v != 1.0) return false;
    return true;
  }

  bool is_weight() const {
    for (double v : vals_)
      if (v < 0.0 || v > 1.0) return false;
    return true;
  }

  friend bool operator==(const SymTensor& a, const SymTensor& b) {
    return a.n_ == b.n_ && a.r_ == b.r_ && a.vals_ == b.vals_;
  }

  friend SymTensor operator-(const SymTensor& a, const SymTensor& b) {
    if (a.n_ != b.n_ || a.r_ != b.r_) throw std::invalid_argument("tensor shape mismatch");
    SymTensor out = a;
    for (std::size_t i = 0; i < out.vals_.size(); ++i) out.vals_[i] -= b.vals_[i];
    return out;
  }

  static std::vector<Edge> enumerate_subsets(int n, int r) {
    std::vector<Edge> subs;
    if (n < r) return subs;
    Edge pick(r);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      subs.push_back(pick);
      int i = r - 1;
      while (i >= 0 && pick[i] == n - r + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
    }
    return subs;
  }

 private:
  static std::vector<std::size_t> build_rank_map(int n, int r) {
    std::vector<std::size_t> map;
    double codes = std::pow(double(n), r);
    if (codes > 5e8) throw std::invalid_argument("sym tensor: shape too large");
    map.assign(std::size_t(codes) + 1, std::size_t(-1));
    auto subs = enumerate_subsets(n, r);
    for (std::size_t idx = 0; idx < subs.size(); ++idx) {
      std::size_t code = 0;
      for (int v : subs[idx]) code = code * std::size_t(n) + std::size_t(v);
      map[code] = idx;
    }
    return map;
  }

  int n_ = 0;
  int r_ = 1;
  std::vector<Edge> subsets_;
  std::vector<std::size_t> rank_of_;  // keyed by base-n code of the sorted subset
  std::vector<double> vals_;
};

/// All-ones tensor J: one on every r-subset, zero on repeats.
inline SymTensor jay(int n, int r) {
  if (n < r) throw std::invalid_argument("jay: need n >= r");
  SymTensor t(n, r);
  for (std::size_t i = 0; i < t.num_subsets(); ++i) t.set_by_rank(i, 1.0);
  return t;
}

inline SymTensor constant_tensor(int n, int r, double q) {
  SymTensor t(n, r);
  for (std::size_t i = 0; i < t.num_subsets(); ++i) t.set_by_rank(i, q);
  return t;
}

inline SymTensor adjacency_tensor(const RGraph& g, int n) {
  if (n < g.num_vertices) throw std::invalid_argument("adjacency_tensor: n too small");
  SymTensor t(n, g.r);
  for (const auto& e : g.edges) t.set(e, 1.0);
  return t;
}

/// Erdos-Renyi model: scalar density p or a full weight tensor Q.
struct ErModel {
  int n = 0;
  int r = 2;
  bool scalar = true;
  double p = 0.5;
  SymTensor q;  // used when scalar == false

  static ErModel uniform(int n, int r, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("er model: density outside [0,1]");
    ErModel m;
    m.n = n;
    m.r = r;
    m.scalar = true;
    m.p = p;
    return m;
  }

  static ErModel inhomogeneous(SymTensor q) {
    if (!q.is_weight()) throw std::invalid_argument("er model: weights outside [0,1]");
    ErModel m;
    m.n = q.n();
    m.r = q.r();
    m.scalar = false;
    m.q = std::move(q);
    return m;
  }

  double density(std::size_t subset_rank) const {
    return scalar ? p : q.get_by_rank(subset_rank);
  }
};

/// One Boolean draw; entries sampled independently in subset-rank order, so a
/// seed pins the tensor exactly.
inline SymTensor sample(const ErModel& model, std::uint64_t seed) {
  SymTensor a(model.n, model.r);
  Rng rng(seed);
  for (std::size_t i = 0; i < a.num_subsets(); ++i)
    a.set_by_rank(i, rng.bernoulli(model.density(i)) ? 1.0 : 0.0);
  return a;
}

/// I_p(Q): relative entropy of mu_Q against mu_p, summed over r-subsets.
inline double relent(double p, const SymTensor& q) {
  if (!q.is_weight()) throw std::invalid_argument("relent: entries outside [0,1]");
  KahanSum s;
  for (std::size_t i = 0; i < q.num_subsets(); ++i) s.add(relent_scalar(p, q.get_by_rank(i)));
  return s.value();
}

/// Log-likelihood ratio W(A) of mu_Q against mu_p at the sample A.
/// Infinite when Q pins an entry the sample contradicts.
inline double loglik_ratio(const SymTensor& a, const SymTensor& q, double p) {
  if (a.n() != q.n() || a.r() != q.r()) throw std::invalid_argument("loglik_ratio: shape mismatch");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("loglik_ratio: p outside (0,1)");
  KahanSum s;
  for (std::size_t i = 0; i < a.num_subsets(); ++i) {
    double ai = a.get_by_rank(i);
    double qi = q.get_by_rank(i);
    if (ai != 0.0) {
      if (qi == 0.0) return -std::numeric_limits<double>::infinity();
      s.add(ai * std::log(qi / p));
    }
    if (ai != 1.0) {
      if (qi == 1.0) return -std::numeric_limits<double>::infinity();
      s.add((1.0 - ai) * std::log((1.0 - qi) / (1.0 - p)));
    }
  }
  return s.value();
}

/// Dense order-r tensor on [n]^r (row-major); residuals and test tensors live
/// here, no symmetry or support constraint.
struct DenseTensor {
  int n = 0;
  int r = 1;
  std::vector<double> data;  // size n^r

  DenseTensor() = default;
  DenseTensor(int n_, int r_) : n(n_), r(r_) {
    double sz = std::pow(double(n), r);
    if (sz > 5e8) throw std::invalid_argument("dense tensor: too large");
    data.assign(std::size_t(sz), 0.0);
  }

  double l2sq() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return s;
  }
};

inline DenseTensor to_dense(const SymTensor& t) {
  DenseTensor d(t.n(), t.r());
  int n = t.n(), r = t.r();
  std::vector<int> tuple(r, 0);
  for (std::size_t idx = 0; idx < d.data.size(); ++idx) {
    std::size_t rem = idx;
    for (int k = r - 1; k >= 0; --k) {
      tuple[k] = int(rem % n);
      rem /= n;
    }
    d.data[idx] = t.at(tuple);
  }
  return d;
}

/// Euclidean pairing over ordered r-tuples.
inline double lin_form(const SymTensor& z, const SymTensor& t) {
  if (z.n() != t.n() || z.r() != t.r()) throw std::invalid_argument("lin_form: shape mismatch");
  // both vanish off distinct-coordinate tuples: r! * sum over subsets
  double s = 0.0;
  for (std::size_t i = 0; i < z.num_subsets(); ++i) s += z.get_by_rank(i) * t.get_by_rank(i);
  double fact = 1.0;
  for (int k = 2; k <= z.r(); ++k) fact *= k;
  return fact * s;
}

inline double lin_form(const DenseTensor& a, const DenseTensor& b) {
  if (a.n != b.n || a.r != b.r) throw std::invalid_argument("lin_form: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

}  // namespace hyperreg
