#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperreg/base.hpp"
#include "hyperreg/tensor.hpp"
#include "hyperreg/util.hpp"

namespace hyperreg {

enum class NormMode { exact, heuristic };

/// Dual-norm evaluation with a recomputable witness: value equals
/// |<Z, witness>| / ||witness||_B whenever a witness is present.
struct NormCertificate {
  double value = 0.0;
  TestTensor witness;
  bool has_witness = false;
  NormMode mode = NormMode::exact;
};

namespace normdetail {

struct FactorLayout {
  std::size_t domain;         // n^{|b|}
  std::vector<int> positions; // coordinate positions of this member
  double weight;              // n^{r-|b|} p^{d*-d_b}
};

struct Problem {
  const DenseTensor* z;
  WeightedBase wb;
  double p;
  int n, r;
  std::vector<FactorLayout> factors;
  double k_empty;     // n^r p^{d*}
  std::size_t total;  // n^r

  std::size_t project(std::size_t tuple_code, int f) const {
    // tuple_code is row-major over [n]^r; extract positions of factor f
    std::size_t code = 0;
    for (int pos : factors[f].positions) {
      std::size_t div = 1;
      for (int k = pos + 1; k < r; ++k) div *= std::size_t(n);
      code = code * std::size_t(n) + (tuple_code / div) % std::size_t(n);
    }
    return code;
  }
};

inline Problem make_problem(const DenseTensor& z, const WeightedBase& wb, double p) {
  Problem pr;
  pr.z = &z;
  pr.wb = wb;
  pr.p = p;
  pr.n = z.n;
  pr.r = z.r;
  if (wb.r != z.r) throw std::invalid_argument("dual norm: base uniformity mismatch");
  pr.total = z.data.size();
  pr.k_empty = int_pow(double(pr.n), pr.r) * int_pow(p, wb.d_star);
  for (const auto& m : wb.members) {
    FactorLayout f;
    f.positions = m.positions;
    f.domain = TestTensor::tuple_count(pr.n, m.positions.size());
    f.weight = int_pow(double(pr.n), pr.r - int(m.positions.size())) *
               int_pow(p, wb.d_star - m.d_b);
    pr.factors.push_back(std::move(f));
  }
  return pr;
}

// Small list of best distinct candidates, used for witness retries.
struct TopList {
  std::size_t cap;
  std::vector<NormCertificate> items;  // sorted by value, descending

  explicit TopList(std::size_t c) : cap(c) {}

  double floor_value() const { return items.size() < cap ? -1.0 : items.back().value; }

  void offer(double value, const TestTensor& t, NormMode mode) {
    if (value <= floor_value()) return;
    for (auto& it : items)
      if (it.witness.factors == t.factors) {
        if (value > it.value) it.value = value;
        std::sort(items.begin(), items.end(),
                  [](const NormCertificate& a, const NormCertificate& b) { return a.value > b.value; });
        return;
      }
    NormCertificate c;
    c.value = value;
    c.witness = t;
    c.has_witness = true;
    c.mode = mode;
    items.push_back(std::move(c));
    std::sort(items.begin(), items.end(),
              [](const NormCertificate& a, const NormCertificate& b) { return a.value > b.value; });
    if (items.size() > cap) items.pop_back();
  }
};

inline bool member_disjoint_from_rest(const Problem& pr, std::size_t f) {
  for (std::size_t g = 0; g < pr.factors.size(); ++g) {
    if (g == f) continue;
    for (int p1 : pr.factors[f].positions)
      for (int p2 : pr.factors[g].positions)
        if (p1 == p2) return false;
  }
  return true;
}

// Optimize the pivot factor given the rest: the denominator depends on the
// pivot support only through its size, so per size class the prefix of the
// sorted marginal is optimal. Requires the pivot positions to be disjoint
// from every other member.
inline void optimize_pivot(const Problem& pr, std::size_t pivot, const std::vector<double>& marg,
                           double completions_per_pivot, double k_fixed,
                           const TestTensor& shell, TopList& top) {
  std::size_t d = pr.factors[pivot].domain;
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return marg[a] > marg[b]; });
  double wp = pr.factors[pivot].weight;

  auto scan = [&](bool from_top) {
    double acc = 0.0;
    double best = -1.0;
    std::size_t best_s = 0;
    for (std::size_t s = 1; s <= d; ++s) {
      int x = from_top ? order[s - 1] : order[d - s];
      acc += marg[x];
      double denom = std::max({k_fixed, wp * double(s), completions_per_pivot * double(s)});
      double v = std::abs(acc) / denom;
      if (v > best) {
        best = v;
        best_s = s;
      }
    }
    if (best <= top.floor_value()) return;
    TestTensor t = shell;
    auto& f = t.factors[pivot];
    std::fill(f.begin(), f.end(), char(0));
    for (std::size_t s = 1; s <= best_s; ++s) f[std::size_t(from_top ? order[s - 1] : order[d - s])] = 1;
    top.offer(best, t, NormMode::exact);
  };
  scan(true);
  scan(false);
}

// enumerate masks over the `outer` factors (each nonzero), recursing; on a
// full assignment run `leaf`
template <typename Leaf>
void enumerate_outer(const Problem& pr, const std::vector<std::size_t>& outer, std::size_t idx,
                     TestTensor& shell, Leaf&& leaf) {
  if (idx == outer.size()) {
    leaf();
    return;
  }
  std::size_t f = outer[idx];
  std::size_t d = pr.factors[f].domain;
  if (d > 24) throw std::domain_error("dual_norm_exact: factor domain too large to enumerate");
  std::uint32_t full = (d == 32) ? 0xffffffffu : ((1u << d) - 1u);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    for (std::size_t x = 0; x < d; ++x) shell.factors[f][x] = char((mask >> x) & 1u);
    enumerate_outer(pr, outer, idx + 1, shell, leaf);
  }
}

inline double estimated_exact_cost(const Problem& pr) {
  if (pr.factors.empty()) return double(pr.total);
  // pick the same split the solver will use
  std::size_t pivot = pr.factors.size();
  std::size_t best_dom = 0;
  for (std::size_t f = 0; f < pr.factors.size(); ++f)
    if (member_disjoint_from_rest(pr, f) && pr.factors[f].domain > best_dom) {
      best_dom = pr.factors[f].domain;
      pivot = f;
    }
  bool pivoted = pivot < pr.factors.size();
  std::size_t inner = pivoted ? pivot : 0;
  if (!pivoted) {
    for (std::size_t f = 0; f < pr.factors.size(); ++f)
      if (pr.factors[f].domain > pr.factors[inner].domain) inner = f;
  }
  double outer_configs = 1.0;
  for (std::size_t f = 0; f < pr.factors.size(); ++f) {
    if (f == inner) continue;
    if (pr.factors[f].domain > 24) return 1e30;
    outer_configs *= std::pow(2.0, double(pr.factors[f].domain));
  }
  double inner_cost = pivoted ? double(pr.factors[inner].domain) * 12.0
                              : std::pow(2.0, double(pr.factors[inner].domain)) * 8.0;
  if (!pivoted && pr.factors[inner].domain > 25) return 1e30;
  return outer_configs * (double(pr.total) + inner_cost);
}

}  // namespace normdetail

inline bool dual_norm_exact_feasible(const DenseTensor& z, const WeightedBase& wb, double p,
                                     double op_budget = double(1ull << 31)) {
  auto pr = normdetail::make_problem(z, wb, p);
  return normdetail::estimated_exact_cost(pr) <= op_budget;
}

/// Exact maximum of |<Z,T>| / ||T||_B over nonzero test tensors of the base.
/// All factors but one are enumerated outright; the remaining factor is
/// optimized per support-size class (exact when its coordinates are disjoint
/// from the other members, which is checked) or swept by Gray code otherwise.
/// Throws when the configuration space exceeds the op budget.
inline std::vector<NormCertificate> dual_norm_exact_topk(const DenseTensor& z,
                                                         const WeightedBase& wb, double p,
                                                         std::size_t k = 1) {
  using namespace normdetail;
  Problem pr = make_problem(z, wb, p);
  if (estimated_exact_cost(pr) > double(1ull << 31))
    throw std::domain_error(
        "dual_norm_exact: configuration space exceeds the exact-oracle budget; "
        "use the heuristic oracle");
  TopList top(k);

  if (pr.factors.empty()) {
    // only the constant-one tensor
    double s = 0.0;
    for (double v : z.data) s += v;
    TestTensor t = TestTensor::zeros(wb, pr.n);
    double denom = std::max(double(pr.total), pr.k_empty);
    top.offer(std::abs(s) / denom, t, NormMode::exact);
    return std::move(top.items);
  }

  // choose the factor handled implicitly
  std::size_t pivot = pr.factors.size();
  std::size_t best_dom = 0;
  for (std::size_t f = 0; f < pr.factors.size(); ++f)
    if (member_disjoint_from_rest(pr, f) && pr.factors[f].domain > best_dom) {
      best_dom = pr.factors[f].domain;
      pivot = f;
    }
  bool pivoted = pivot < pr.factors.size();
  std::size_t inner = pivot;
  if (!pivoted) {
    inner = 0;
    for (std::size_t f = 0; f < pr.factors.size(); ++f)
      if (pr.factors[f].domain > pr.factors[inner].domain) inner = f;
  }
  std::vector<std::size_t> outer;
  for (std::size_t f = 0; f < pr.factors.size(); ++f)
    if (f != inner) outer.push_back(f);

  TestTensor shell = TestTensor::zeros(wb, pr.n);
  // precomputed projections of every tuple onto each factor
  std::vector<std::vector<std::uint32_t>> proj(pr.factors.size());
  for (std::size_t f = 0; f < pr.factors.size(); ++f) {
    proj[f].resize(pr.total);
    for (std::size_t t = 0; t < pr.total; ++t) proj[f][t] = std::uint32_t(pr.project(t, f));
  }

  std::size_t idom = pr.factors[inner].domain;
  std::vector<double> marg(idom);
  std::vector<double> count(idom);

  auto leaf = [&]() {
    std::fill(marg.begin(), marg.end(), 0.0);
    std::fill(count.begin(), count.end(), 0.0);
    for (std::size_t t = 0; t < pr.total; ++t) {
      bool pass = true;
      for (std::size_t f : outer)
        if (!shell.factors[f][proj[f][t]]) {
          pass = false;
          break;
        }
      if (!pass) continue;
      marg[proj[inner][t]] += z.data[t];
      count[proj[inner][t]] += 1.0;
    }
    double k_fixed = pr.k_empty;
    for (std::size_t f : outer) {
      double sup = 0.0;
      for (char c : shell.factors[f]) sup += (c != 0);
      k_fixed = std::max(k_fixed, pr.factors[f].weight * sup);
    }
    if (pivoted) {
      // completions per pivot element are constant across the pivot domain
      double completions = 0.0;
      for (std::size_t x = 0; x < idom; ++x) completions += count[x];
      completions /= double(idom);
      optimize_pivot(pr, inner, marg, completions, k_fixed, shell, top);
      return;
    }
    // Gray sweep of the inner factor, tracking inner product and l1 exactly
    auto& fac = shell.factors[inner];
    std::fill(fac.begin(), fac.end(), char(0));
    double ip = 0.0, l1 = 0.0, sup = 0.0;
    std::uint64_t steps = (1ull << idom) - 1ull;
    double wi = pr.factors[inner].weight;
    for (std::uint64_t i = 1; i <= steps; ++i) {
      std::size_t bit = std::size_t(__builtin_ctzll(i));
      if (fac[bit]) {
        fac[bit] = 0;
        ip -= marg[bit];
        l1 -= count[bit];
        sup -= 1.0;
      } else {
        fac[bit] = 1;
        ip += marg[bit];
        l1 += count[bit];
        sup += 1.0;
      }
      if (sup == 0.0) continue;
      double denom = std::max({k_fixed, wi * sup, l1});
      double v = std::abs(ip) / denom;
      if (v > top.floor_value()) top.offer(v, shell, NormMode::exact);
    }
  };

  enumerate_outer(pr, outer, 0, shell, leaf);
  if (top.items.empty()) {
    NormCertificate c;
    c.value = 0.0;
    c.has_witness = false;
    c.mode = NormMode::exact;
    top.items.push_back(std::move(c));
  }
  return std::move(top.items);
}

inline NormCertificate dual_norm_exact(const DenseTensor& z, const WeightedBase& wb, double p) {
  return dual_norm_exact_topk(z, wb, p, 1).front();
}

inline NormCertificate dual_norm_exact(const SymTensor& z, const WeightedBase& wb, double p) {
  return dual_norm_exact(to_dense(z), wb, p);
}

/// Alternating maximization under per-factor support caps swept over a
/// geometric grid. Certifies a lower bound only; equals the exact value on
/// most small instances but carries no guarantee.
inline std::vector<NormCertificate> dual_norm_heuristic_topk(const DenseTensor& z,
                                                             const WeightedBase& wb, double p,
                                                             int restarts, std::uint64_t seed,
                                                             std::size_t k = 1) {
  using namespace normdetail;
  Problem pr = make_problem(z, wb, p);
  TopList top(k);
  TestTensor t = TestTensor::zeros(wb, pr.n);
  if (pr.factors.empty()) {
    double s = 0.0;
    for (double v : z.data) s += v;
    double denom = std::max(double(pr.total), pr.k_empty);
    top.offer(std::abs(s) / denom, t, NormMode::heuristic);
    for (auto& it : top.items) it.mode = NormMode::heuristic;
    return std::move(top.items);
  }

  std::vector<std::vector<std::uint32_t>> proj(pr.factors.size());
  for (std::size_t f = 0; f < pr.factors.size(); ++f) {
    proj[f].resize(pr.total);
    for (std::size_t tt = 0; tt < pr.total; ++tt) proj[f][tt] = std::uint32_t(pr.project(tt, f));
  }

  // geometric cap grid per factor
  std::vector<std::vector<std::size_t>> caps(pr.factors.size());
  for (std::size_t f = 0; f < pr.factors.size(); ++f) {
    for (std::size_t c = 1; c < pr.factors[f].domain; c *= 2) caps[f].push_back(c);
    caps[f].push_back(pr.factors[f].domain);
  }
  std::size_t combos = 1;
  for (const auto& cs : caps) combos *= cs.size();

  auto evaluate = [&](const TestTensor& cand) {
    double ip = 0.0;
    for (std::size_t tt = 0; tt < pr.total; ++tt) {
      bool pass = true;
      for (std::size_t f = 0; f < pr.factors.size(); ++f)
        if (!cand.factors[f][proj[f][tt]]) {
          pass = false;
          break;
        }
      if (pass) ip += z.data[tt];
    }
    return std::abs(ip) / test_size(cand, p);
  };

  std::vector<double> marg;
  std::vector<double> count;
  // exact optimization of one factor given the others, valid when the factor's
  // coordinates are disjoint from every other member; polish step at the fixed
  // point of the capped sweeps
  auto polish = [&](TestTensor& cand) {
    bool improved_any = false;
    for (int round = 0; round < 3; ++round) {
      bool improved = false;
      for (std::size_t f = 0; f < pr.factors.size(); ++f) {
        if (!member_disjoint_from_rest(pr, f)) continue;
        std::size_t d = pr.factors[f].domain;
        marg.assign(d, 0.0);
        count.assign(d, 0.0);
        for (std::size_t tt = 0; tt < pr.total; ++tt) {
          bool pass = true;
          for (std::size_t g = 0; g < pr.factors.size(); ++g) {
            if (g == f) continue;
            if (!cand.factors[g][proj[g][tt]]) {
              pass = false;
              break;
            }
          }
          if (!pass) continue;
          marg[proj[f][tt]] += z.data[tt];
          count[proj[f][tt]] += 1.0;
        }
        double completions = 0.0;
        for (std::size_t x = 0; x < d; ++x) completions += count[x];
        completions /= double(d);
        double k_fixed = pr.k_empty;
        for (std::size_t g = 0; g < pr.factors.size(); ++g) {
          if (g == f) continue;
          double sup = 0.0;
          for (char ch : cand.factors[g]) sup += (ch != 0);
          k_fixed = std::max(k_fixed, pr.factors[g].weight * sup);
        }
        std::vector<int> order(d);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return marg[a] > marg[b]; });
        double wf = pr.factors[f].weight;
        double cur_ip = 0.0, cur_sup = 0.0;
        for (std::size_t x = 0; x < d; ++x)
          if (cand.factors[f][x]) {
            cur_ip += marg[x];
            cur_sup += 1.0;
          }
        double cur_val =
            cur_sup > 0
                ? std::abs(cur_ip) / std::max({k_fixed, wf * cur_sup, completions * cur_sup})
                : 0.0;
        double best_val = cur_val;
        std::size_t best_s = 0;
        bool best_top = true;
        for (int dirn = 0; dirn < 2; ++dirn) {
          double acc = 0.0;
          for (std::size_t s = 1; s <= d; ++s) {
            acc += marg[std::size_t(dirn == 0 ? order[s - 1] : order[d - s])];
            double v = std::abs(acc) / std::max({k_fixed, wf * double(s), completions * double(s)});
            if (v > best_val * (1.0 + 1e-12)) {
              best_val = v;
              best_s = s;
              best_top = (dirn == 0);
            }
          }
        }
        if (best_s > 0) {
          std::fill(cand.factors[f].begin(), cand.factors[f].end(), char(0));
          for (std::size_t s = 1; s <= best_s; ++s)
            cand.factors[f][std::size_t(best_top ? order[s - 1] : order[d - s])] = 1;
          improved = true;
          improved_any = true;
        }
      }
      if (!improved) break;
    }
    return improved_any;
  };

  int sweeps_max = 24;
  long long total_runs = std::max<long long>(1, restarts);
  for (long long run = 0; run < total_runs; ++run) {
    Rng rng(derive_seed(seed, std::uint64_t(run)));
    std::size_t combo = std::size_t(run) % combos;
    std::vector<std::size_t> cap(pr.factors.size());
    {
      std::size_t c = combo;
      for (std::size_t f = 0; f < pr.factors.size(); ++f) {
        cap[f] = caps[f][c % caps[f].size()];
        c /= caps[f].size();
      }
    }
    for (int polarity : {+1, -1}) {
      // random initial supports of the capped sizes
      for (std::size_t f = 0; f < pr.factors.size(); ++f) {
        auto& fac = t.factors[f];
        std::fill(fac.begin(), fac.end(), char(0));
        std::size_t d = fac.size();
        for (std::size_t picked = 0; picked < cap[f]; ++picked) fac[rng.index(d)] = 1;
        if (std::count(fac.begin(), fac.end(), char(1)) == 0) fac[0] = 1;
      }
      bool changed = true;
      for (int sweep = 0; sweep < sweeps_max && changed; ++sweep) {
        changed = false;
        for (std::size_t f = 0; f < pr.factors.size(); ++f) {
          std::size_t d = pr.factors[f].domain;
          marg.assign(d, 0.0);
          for (std::size_t tt = 0; tt < pr.total; ++tt) {
            bool pass = true;
            for (std::size_t g = 0; g < pr.factors.size(); ++g) {
              if (g == f) continue;
              if (!t.factors[g][proj[g][tt]]) {
                pass = false;
                break;
              }
            }
            if (pass) marg[proj[f][tt]] += double(polarity) * z.data[tt];
          }
          // indicator of the top-s marginal entries, ties to the lowest index
          std::vector<int> order(d);
          std::iota(order.begin(), order.end(), 0);
          std::stable_sort(order.begin(), order.end(),
                           [&](int a, int b) { return marg[a] > marg[b]; });
          std::vector<char> next(d, 0);
          for (std::size_t s = 0; s < cap[f] && s < d; ++s) next[std::size_t(order[s])] = 1;
          if (std::count(next.begin(), next.end(), char(1)) == 0) next[std::size_t(order[0])] = 1;
          if (next != t.factors[f]) {
            t.factors[f] = std::move(next);
            changed = true;
          }
        }
      }
      if (t.nonzero()) {
        polish(t);
        if (t.nonzero()) top.offer(evaluate(t), t, NormMode::heuristic);
      }
    }
  }
  if (top.items.empty()) {
    NormCertificate c;
    c.value = 0.0;
    c.has_witness = false;
    c.mode = NormMode::heuristic;
    top.items.push_back(std::move(c));
  }
  for (auto& it : top.items) it.mode = NormMode::heuristic;
  return std::move(top.items);
}

inline NormCertificate dual_norm_heuristic(const DenseTensor& z, const WeightedBase& wb, double p,
                                           int restarts, std::uint64_t seed) {
  return dual_norm_heuristic_topk(z, wb, p, restarts, seed, 1).front();
}

inline NormCertificate dual_norm_heuristic(const SymTensor& z, const WeightedBase& wb, double p,
                                           int restarts, std::uint64_t seed) {
  return dual_norm_heuristic(to_dense(z), wb, p, restarts, seed);
}

struct SystemNormResult {
  double value = 0.0;
  std::vector<NormCertificate> per_edge;
};

/// ||Z||_{B*} over a base system: max of the per-edge dual norms.
inline SystemNormResult system_norm(const DenseTensor& z, const BaseSystem& sys, double p,
                                    NormMode mode, int restarts = 32, std::uint64_t seed = 1) {
  SystemNormResult out;
  for (std::size_t i = 0; i < sys.bases.size(); ++i) {
    NormCertificate c = (mode == NormMode::exact)
                            ? dual_norm_exact(z, sys.bases[i], p)
                            : dual_norm_heuristic(z, sys.bases[i], p, restarts,
                                                  derive_seed(seed, i));
    out.value = std::max(out.value, c.value);
    out.per_edge.push_back(std::move(c));
  }
  return out;
}

inline SystemNormResult system_norm(const SymTensor& z, const BaseSystem& sys, double p,
                                    NormMode mode, int restarts = 32, std::uint64_t seed = 1) {
  return system_norm(to_dense(z), sys, p, mode, restarts, seed);
}

enum class Membership { member, not_member, inconclusive };

/// Is A within B*-distance delta of Q? Exact mode decides; the heuristic can
/// only certify violation, so "inside" comes back inconclusive.
inline Membership ball_membership(const SymTensor& a, const SymTensor& q, const BaseSystem& sys,
                                  double p, double delta, NormMode mode, int restarts = 32,
                                  std::uint64_t seed = 1) {
  if (a.n() != q.n() || a.r() != q.r()) throw std::invalid_argument("ball_membership: shape mismatch");
  if (std::isinf(delta) && delta > 0) return Membership::member;
  SymTensor diff = q - a;
  SystemNormResult res = system_norm(diff, sys, p, mode, restarts, seed);
  if (res.value > delta) return Membership::not_member;
  return mode == NormMode::exact ? Membership::member : Membership::inconclusive;
}

}  // namespace hyperreg
