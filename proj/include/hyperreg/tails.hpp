#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperreg/homomorphism.hpp"
#include "hyperreg/hypergraph.hpp"
#include "hyperreg/tensor.hpp"
#include "hyperreg/util.hpp"
#include "hyperreg/variational.hpp"

namespace hyperreg {

struct TailEstimate {
  double prob = 0.0;
  double log_prob = -std::numeric_limits<double>::infinity();
  std::string method;
  double stderr_prob = 0.0;  // zero for exact methods
  bool exact = false;
  long long samples = 0;
  std::uint64_t seed = 0;
  double ess = 0.0;  // effective sample size (importance sampling)
};

namespace taildetail {

// joint tail event on the hom vector of the constraint graphs
inline std::function<bool(const std::vector<double>&)> event_from(const TailProblem& prob) {
  std::vector<double> targets;
  std::vector<bool> upper;
  for (const auto& c : prob.constraints) {
    targets.push_back((c.dir == TailDirection::upper ? (1.0 + c.delta) : (1.0 - c.delta)) *
                      int_pow(prob.p, c.graph.num_edges()) *
                      int_pow(double(prob.n), c.graph.num_vertices));
    upper.push_back(c.dir == TailDirection::upper);
  }
  return [targets, upper](const std::vector<double>& homs) {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      if (upper[k] && !(homs[k] >= targets[k])) return false;
      if (!upper[k] && !(homs[k] <= targets[k])) return false;
    }
    return true;
  };
}

// flip deltas by the inclusion-exclusion over which edges land on the flipped
// r-set; exact for Boolean tensors
struct FlipPlan {
  RGraph h;
  struct Term {
    std::vector<int> s_edges;       // edge indices forced onto the flipped set
    std::vector<int> other_edges;   // remaining edge indices
    std::vector<int> pinned_verts;  // union of the forced edges
    int sign_parity;                // |S| mod 2
  };
  std::vector<Term> terms;

  explicit FlipPlan(const RGraph& graph) : h(graph) {
    int m = h.num_edges();
    if (m > 20) throw std::invalid_argument("exact enumeration: too many edges to track");
    for (int mask = 1; mask < (1 << m); ++mask) {
      Term t;
      std::set<int> vs;
      for (int i = 0; i < m; ++i) {
        if (mask & (1 << i)) {
          t.s_edges.push_back(i);
          for (int u : h.edges[i]) vs.insert(u);
        } else {
          t.other_edges.push_back(i);
        }
      }
      t.pinned_verts.assign(vs.begin(), vs.end());
      t.sign_parity = int(t.s_edges.size()) % 2;
      terms.push_back(std::move(t));
    }
  }

  // hom(A + sigma U) - hom(A) with U the symmetric unit at `flip_set`
  double delta(const SymTensor& a, const Edge& flip_set, int sigma) const {
    int n = a.n();
    int v = h.num_vertices;
    double total = 0.0;
    std::vector<int> phi(v, -1);
    for (const auto& t : terms) {
      double term_sign = (sigma < 0 && t.sign_parity == 1) ? -1.0 : 1.0;
      // assign the pinned vertices into the flipped set so that every forced
      // edge covers it exactly
      std::vector<int> choice(t.pinned_verts.size(), 0);
      double term_sum = 0.0;
      while (true) {
        for (std::size_t i = 0; i < t.pinned_verts.size(); ++i)
          phi[t.pinned_verts[i]] = flip_set[choice[i]];
        bool onto = true;
        for (int ei : t.s_edges) {
          Edge img;
          for (int u : h.edges[ei]) img.push_back(phi[u]);
          std::sort(img.begin(), img.end());
          if (img != flip_set) {
            onto = false;
            break;
          }
        }
        if (onto) {
          // extend over the free vertices, evaluating the remaining edges on A
          std::function<double(int)> ext = [&](int vert) -> double {
            while (vert < v && phi[vert] >= 0) ++vert;
            if (vert == v) {
              double prod = 1.0;
              for (int ei : t.other_edges) {
                std::vector<int> img;
                for (int u : h.edges[ei]) img.push_back(phi[u]);
                prod *= a.at(img);
                if (prod == 0.0) return 0.0;
              }
              return prod;
            }
            double s = 0.0;
            for (int x = 0; x < n; ++x) {
              phi[vert] = x;
              s += ext(vert + 1);
            }
            phi[vert] = -1;
            return s;
          };
          term_sum += ext(0);
        }
        std::size_t i = 0;
        while (i < choice.size() && choice[i] == int(flip_set.size()) - 1) choice[i++] = 0;
        if (i == choice.size()) break;
        ++choice[i];
      }
      for (int u : t.pinned_verts) phi[u] = -1;
      total += term_sign * term_sum;
    }
    return total;
  }
};

struct EnumOutcome {
  double prob_mu = 0.0;
  double prob_nu = 0.0;
};

/// Walk all of {0,1}^{C(n,r)} in Gray order with incremental hom values for
/// the tracked graphs; sums the mu_p mass (and optionally the nu mass) of the
/// states the predicate accepts.
inline EnumOutcome enumerate_measure(int n, int r, double p, const SymTensor* nu,
                                     const std::vector<RGraph>& tracked,
                                     const std::function<bool(const std::vector<double>&)>& event) {
  long long nsub = binom(n, r);
  if (nsub > 22) throw std::invalid_argument("exact enumeration: C(n,r) exceeds 22");
  int nbits = int(nsub);
  SymTensor a(n, r);
  std::vector<FlipPlan> plans;
  std::vector<double> homs;
  for (const auto& h : tracked) {
    plans.emplace_back(h);
    homs.push_back(hom_count(h, a));
  }
  std::vector<double> pw(nbits + 1);
  for (int k = 0; k <= nbits; ++k) pw[k] = int_pow(p, k) * int_pow(1.0 - p, nbits - k);
  double nu_weight = 1.0;
  std::vector<double> nu_ratio(nbits, 1.0);
  if (nu) {
    for (int j = 0; j < nbits; ++j) {
      double x = nu->get_by_rank(std::size_t(j));
      if (!(x > 0.0 && x < 1.0))
        throw std::invalid_argument("exact enumeration: nu entries must lie in (0,1)");
      nu_weight *= (1.0 - x);
      nu_ratio[j] = x / (1.0 - x);
    }
  }
  int ones = 0;
  EnumOutcome out;
  auto visit = [&]() {
    if (event(homs)) {
      out.prob_mu += pw[ones];
      if (nu) out.prob_nu += nu_weight;
    }
  };
  visit();
  unsigned long long states = 1ull << nbits;
  for (unsigned long long i = 1; i < states; ++i) {
    int j = int(__builtin_ctzll(i));
    const Edge& sub = a.subsets()[std::size_t(j)];
    double cur = a.get_by_rank(std::size_t(j));
    int sigma = (cur == 0.0) ? +1 : -1;
    for (std::size_t k = 0; k < plans.size(); ++k) homs[k] += plans[k].delta(a, sub, sigma);
    a.set_by_rank(std::size_t(j), cur == 0.0 ? 1.0 : 0.0);
    ones += sigma;
    if (nu) nu_weight *= (sigma > 0) ? nu_ratio[j] : 1.0 / nu_ratio[j];
    visit();
  }
  return out;
}

}  // namespace taildetail

/// Ground-truth tail probability by full enumeration (C(n,r) <= 22).
inline TailEstimate tail_exact_enum(const TailProblem& prob) {
  std::vector<RGraph> tracked;
  for (const auto& c : prob.constraints) tracked.push_back(c.graph);
  auto out = taildetail::enumerate_measure(prob.n, prob.constraints[0].graph.r, prob.p, nullptr,
                                           tracked, taildetail::event_from(prob));
  TailEstimate est;
  est.prob = out.prob_mu;
  est.log_prob = out.prob_mu > 0 ? std::log(out.prob_mu) : -std::numeric_limits<double>::infinity();
  est.method = "exact-enumeration";
  est.exact = true;
  return est;
}

/// Plain Monte Carlo frequency with a Wilson interval.
inline TailEstimate tail_mc(const TailProblem& prob, long long samples, std::uint64_t seed) {
  auto event = taildetail::event_from(prob);
  long long hits = 0;
  std::vector<double> homs(prob.constraints.size(), 0.0);
  for (long long s = 0; s < samples; ++s) {
    SymTensor a =
        sample(ErModel::uniform(prob.n, prob.constraints[0].graph.r, prob.p), derive_seed(seed, s));
    for (std::size_t k = 0; k < prob.constraints.size(); ++k)
      homs[k] = hom_count(prob.constraints[k].graph, a);
    if (event(homs)) ++hits;
  }
  TailEstimate est;
  est.prob = samples > 0 ? double(hits) / double(samples) : 0.0;
  est.log_prob = est.prob > 0 ? std::log(est.prob) : -std::numeric_limits<double>::infinity();
  est.method = "naive-mc";
  est.samples = samples;
  est.seed = seed;
  est.stderr_prob = samples > 0 ? std::sqrt(est.prob * (1.0 - est.prob) / double(samples)) : 0.0;
  return est;
}

/// Importance sampling under mu_{Q*}: average 1_E(A) exp(-W(A)); unbiased for
/// the mu_p probability.
inline TailEstimate tail_tilted(const TailProblem& prob, const SymTensor& qstar, long long samples,
                                std::uint64_t seed) {
  for (std::size_t i = 0; i < qstar.num_subsets(); ++i) {
    double x = qstar.get_by_rank(i);
    if (!(x > 0.0 && x < 1.0))
      throw std::invalid_argument("tail_tilted: tilt entries must lie in (0,1)");
  }
  auto event = taildetail::event_from(prob);
  double sum = 0.0, sumsq = 0.0, wsum = 0.0, wsumsq = 0.0;
  std::vector<double> homs(prob.constraints.size(), 0.0);
  for (long long s = 0; s < samples; ++s) {
    SymTensor a = sample(ErModel::inhomogeneous(qstar), derive_seed(seed, s));
    for (std::size_t k = 0; k < prob.constraints.size(); ++k)
      homs[k] = hom_count(prob.constraints[k].graph, a);
    double term = 0.0;
    if (event(homs)) term = std::exp(-loglik_ratio(a, qstar, prob.p));
    sum += term;
    sumsq += term * term;
    if (term > 0) {
      wsum += term;
      wsumsq += term * term;
    }
  }
  TailEstimate est;
  est.prob = samples > 0 ? sum / double(samples) : 0.0;
  est.log_prob = est.prob > 0 ? std::log(est.prob) : -std::numeric_limits<double>::infinity();
  est.method = "tilted-is";
  est.samples = samples;
  est.seed = seed;
  if (samples > 1) {
    double var = (sumsq - sum * sum / double(samples)) / double(samples - 1);
    est.stderr_prob = std::sqrt(std::max(0.0, var) / double(samples));
  }
  est.ess = wsumsq > 0 ? wsum * wsum / wsumsq : 0.0;
  return est;
}

struct ConcentrationPoint {
  int n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ratio = 0.0;  // variance / mean^2
};

struct ConcentrationReport {
  std::vector<ConcentrationPoint> points;
  bool decreasing = true;
  std::uint64_t seed = 0;
};

/// Empirical Var_Q(t_p(H,A)) / (E_Q t_p)^2 along an n-ladder with hub-profile
/// tilts (or any caller-supplied profile); the ratio should fall as n grows.
inline ConcentrationReport tilted_concentration_check(
    const RGraph& h, double p, double delta, const std::vector<int>& ladder, long long samples,
    std::uint64_t seed, const std::function<SymTensor(int)>& profile = nullptr) {
  ConcentrationReport rep;
  rep.seed = seed;
  for (int n : ladder) {
    SymTensor q = profile ? profile(n) : planted_hub(h, n, p, delta).q;
    double sum = 0.0, sumsq = 0.0;
    for (long long s = 0; s < samples; ++s) {
      SymTensor a = sample(ErModel::inhomogeneous(q), derive_seed(seed, 1000000ull * n + s));
      double t = tp_density(h, a, p);
      sum += t;
      sumsq += t * t;
    }
    ConcentrationPoint pt;
    pt.n = n;
    pt.mean = sum / double(samples);
    pt.variance = std::max(0.0, sumsq / double(samples) - pt.mean * pt.mean);
    pt.ratio = pt.variance / (pt.mean * pt.mean);
    rep.points.push_back(pt);
  }
  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i)
    if (!(rep.points[i + 1].ratio < rep.points[i].ratio)) rep.decreasing = false;
  return rep;
}

// -------- theorem-as-inequality checks --------

struct HalfSpace {
  std::vector<double> weights;  // one per r-subset, in subset-rank order
  double threshold = 0.0;       // event: <w, A> >= threshold
};

struct ConvexBoundReport {
  double prob = 0.0;        // mu_p(B), exact
  double inf_entropy = 0.0; // lower bound on inf_{hull(B)} I_p from the FW gap
  double bound = 0.0;       // exp(-inf_entropy)
  double fw_gap = 0.0;
  bool pass = true;
  long long vertex_count = 0;
};

/// mu_p(B) <= exp(-inf_{hull(B cap A_{n,r})} I_p) for an intersection of
/// half-spaces: probability by enumeration, infimum by Frank-Wolfe over the
/// satisfying vertices (the reported bound uses the duality-gap lower bound, so
/// a failure is a genuine violation).
inline ConvexBoundReport convex_entropy_bound_check(const std::vector<HalfSpace>& spaces, int n,
                                                    int r, double p) {
  long long nsub = binom(n, r);
  if (nsub > 22) throw std::invalid_argument("convex check: C(n,r) exceeds 22");
  if (spaces.empty() || spaces.size() > 3)
    throw std::invalid_argument("convex check: between one and three half-spaces");
  int nbits = int(nsub);
  ConvexBoundReport rep;
  std::vector<std::uint32_t> satisfying;
  std::vector<double> lin(spaces.size(), 0.0);
  std::vector<double> pw(nbits + 1);
  for (int k = 0; k <= nbits; ++k) pw[k] = int_pow(p, k) * int_pow(1.0 - p, nbits - k);
  int ones = 0;
  std::uint32_t state = 0;
  auto visit = [&]() {
    for (std::size_t j = 0; j < spaces.size(); ++j)
      if (!(lin[j] >= spaces[j].threshold)) return;
    rep.prob += pw[ones];
    satisfying.push_back(state);
  };
  visit();
  unsigned long long states = 1ull << nbits;
  for (unsigned long long i = 1; i < states; ++i) {
    int j = int(__builtin_ctzll(i));
    int sigma = (state >> j) & 1u ? -1 : +1;
    state ^= (1u << j);
    ones += sigma;
    for (std::size_t s = 0; s < spaces.size(); ++s) lin[s] += sigma * spaces[s].weights[j];
    visit();
  }
  rep.vertex_count = (long long)satisfying.size();
  if (satisfying.empty()) {
    rep.inf_entropy = std::numeric_limits<double>::infinity();
    rep.bound = 0.0;
    rep.pass = rep.prob == 0.0;
    return rep;
  }
  // Frank-Wolfe on I_p over the convex hull of the satisfying states
  std::vector<double> q(nbits, 0.0);
  for (int j = 0; j < nbits; ++j) q[j] = (satisfying[0] >> j) & 1u ? 1.0 : 0.0;
  double gap = 0.0;
  double fval = 0.0;
  auto clampq = [](double x) { return std::min(1.0 - 1e-12, std::max(1e-12, x)); };
  for (int it = 0; it < 400; ++it) {
    std::vector<double> grad(nbits);
    fval = 0.0;
    for (int j = 0; j < nbits; ++j) {
      double x = clampq(q[j]);
      grad[j] = std::log(x / p) - std::log((1.0 - x) / (1.0 - p));
      fval += relent_scalar(p, q[j]);
    }
    double best_dot = 1e300;
    std::uint32_t best_v = satisfying[0];
    for (std::uint32_t v : satisfying) {
      double dot = 0.0;
      for (int j = 0; j < nbits; ++j)
        if ((v >> j) & 1u) dot += grad[j];
      if (dot < best_dot) {
        best_dot = dot;
        best_v = v;
      }
    }
    double qdot = 0.0;
    for (int j = 0; j < nbits; ++j) qdot += grad[j] * q[j];
    gap = qdot - best_dot;
    if (gap < 1e-10) break;
    // exact line search toward the best vertex (convex 1-D problem)
    double lo = 0.0, hi = 1.0;
    auto dir_val = [&](double t) {
      double s = 0.0;
      for (int j = 0; j < nbits; ++j) {
        double v = ((best_v >> j) & 1u) ? 1.0 : 0.0;
        s += relent_scalar(p, (1.0 - t) * q[j] + t * v);
      }
      return s;
    };
    for (int ls = 0; ls < 60; ++ls) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (dir_val(m1) <= dir_val(m2))
        hi = m2;
      else
        lo = m1;
    }
    double t = 0.5 * (lo + hi);
    for (int j = 0; j < nbits; ++j)
      q[j] = (1.0 - t) * q[j] + t * (((best_v >> j) & 1u) ? 1.0 : 0.0);
  }
  rep.fw_gap = std::max(0.0, gap);
  rep.inf_entropy = std::max(0.0, fval - rep.fw_gap);
  rep.bound = std::exp(-rep.inf_entropy);
  rep.pass = rep.prob <= rep.bound * (1.0 + 1e-9);
  return rep;
}

struct TiltBoundReport {
  double log_mu = 0.0;
  double log_nu = 0.0;
  double divergence = 0.0;  // D(nu || mu_p)
  double smallest_c = 0.0;  // smallest C making the bound hold (inf if none)
  double nu_prob = 0.0;
};

/// log mu_p(E) >= -D(nu||mu_p) + log nu(E) - C sqrt(d) |log((1-p)/p)| / sqrt(nu(E));
/// reports the smallest workable C.
inline TiltBoundReport product_tilt_lower_bound_check(const TailProblem& prob,
                                                      const SymTensor& nu) {
  std::vector<RGraph> tracked;
  for (const auto& c : prob.constraints) tracked.push_back(c.graph);
  auto out = taildetail::enumerate_measure(prob.n, prob.constraints[0].graph.r, prob.p, &nu,
                                           tracked, taildetail::event_from(prob));
  TiltBoundReport rep;
  rep.nu_prob = out.prob_nu;
  rep.log_mu = out.prob_mu > 0 ? std::log(out.prob_mu) : -std::numeric_limits<double>::infinity();
  rep.log_nu = out.prob_nu > 0 ? std::log(out.prob_nu) : -std::numeric_limits<double>::infinity();
  rep.divergence = relent(prob.p, nu);
  double d = double(binom(prob.n, prob.constraints[0].graph.r));
  double logratio = std::abs(std::log((1.0 - prob.p) / prob.p));
  double slack = (-rep.divergence + rep.log_nu) - rep.log_mu;
  if (out.prob_nu == 0.0) {
    rep.smallest_c = 0.0;  // right side is -infinity, bound vacuous
    return rep;
  }
  if (slack <= 0.0) {
    rep.smallest_c = 0.0;
    return rep;
  }
  double denom = std::sqrt(d) * logratio / std::sqrt(out.prob_nu);
  rep.smallest_c = denom > 0 ? slack / denom : std::numeric_limits<double>::infinity();
  return rep;
}

struct FkgReport {
  double p_lower = 0.0;          // P(L)
  double p_joint = 0.0;          // P(L and crude)
  double p_crude = 0.0;          // P(crude)
  bool restriction_pass = true;  // P(L) <= 2 P(L and crude)
  bool fkg_pass = true;          // P(L and crude) >= P(L) P(crude)
};

/// FKG restriction step for the joint lower tail: conditioning on crude
/// subgraph-count bounds costs at most a factor two, and the two decreasing
/// events are positively associated.
inline FkgReport fkg_restriction_check(const TailProblem& prob, double c_cap) {
  for (const auto& c : prob.constraints)
    if (c.dir != TailDirection::lower)
      throw std::invalid_argument("fkg check: lower-tail constraints only");
  int r = prob.constraints[0].graph.r;
  std::vector<RGraph> tracked;
  std::vector<std::size_t> owner;  // constraint index per tracked graph
  std::vector<bool> is_main;
  for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
    tracked.push_back(prob.constraints[k].graph);
    owner.push_back(k);
    is_main.push_back(true);
    for (const auto& f : proper_edge_subgraphs(prob.constraints[k].graph)) {
      if (f.edges.empty()) continue;
      tracked.push_back(f);
      owner.push_back(k);
      is_main.push_back(false);
    }
  }
  std::vector<double> main_target, crude_target;
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    double scale = int_pow(prob.p, tracked[i].num_edges()) *
                   int_pow(double(prob.n), tracked[i].num_vertices);
    if (is_main[i])
      main_target.push_back((1.0 - prob.constraints[owner[i]].delta) * scale);
    else
      main_target.push_back(std::numeric_limits<double>::infinity());
    crude_target.push_back(c_cap * scale);
  }
  auto lower_event = [&](const std::vector<double>& homs) {
    for (std::size_t i = 0; i < homs.size(); ++i)
      if (is_main[i] && !(homs[i] <= main_target[i])) return false;
    return true;
  };
  auto crude_event = [&](const std::vector<double>& homs) {
    for (std::size_t i = 0; i < homs.size(); ++i)
      if (!is_main[i] && !(homs[i] <= crude_target[i])) return false;
    return true;
  };
  FkgReport rep;
  rep.p_lower =
      taildetail::enumerate_measure(prob.n, r, prob.p, nullptr, tracked, lower_event).prob_mu;
  rep.p_crude =
      taildetail::enumerate_measure(prob.n, r, prob.p, nullptr, tracked, crude_event).prob_mu;
  rep.p_joint = taildetail::enumerate_measure(
                    prob.n, r, prob.p, nullptr, tracked,
                    [&](const std::vector<double>& homs) {
                      return lower_event(homs) && crude_event(homs);
                    })
                    .prob_mu;
  rep.restriction_pass = rep.p_lower <= 2.0 * rep.p_joint + 1e-15;
  rep.fkg_pass = rep.p_joint + 1e-15 >= rep.p_lower * rep.p_crude;
  return rep;
}

struct SidorenkoTailReport {
  bool on_verified_list = true;  // advisory-only when false
  double lt = 0.0;               // -log P(t_p <= 1 - delta), exact
  double bound = 0.0;            // C(n,r) I_p(q)
  double q = 0.0;
  bool pass = true;
};

/// Membership in the list with a known Sidorenko proof: one edge or a
/// matching in any uniformity; paths and even cycles for graphs.
inline bool on_verified_sidorenko_list(const RGraph& h) {
  if (h.edges.empty()) return false;
  bool disjoint = true;
  for (std::size_t i = 0; i < h.edges.size() && disjoint; ++i)
    for (std::size_t j = i + 1; j < h.edges.size(); ++j)
      if (sets_intersect(h.edges[i], h.edges[j])) {
        disjoint = false;
        break;
      }
  if (disjoint) return true;  // single edge or a matching
  if (h.r != 2) return false;
  auto core = homdetail::support_core(h).first;
  if (is_isomorphic(core, path_graph(core.num_edges()))) return true;
  if (core.num_edges() % 2 == 0 && core.num_edges() >= 4 &&
      is_isomorphic(core, cycle_graph(core.num_edges())))
    return true;
  return false;
}

/// Non-asymptotic lower-tail bound for Sidorenko hypergraphs:
/// LT >= C(n,r) I_p(q) with q = (1-delta)^{1/e} p n^r / (n)_r.
inline SidorenkoTailReport sidorenko_lower_tail_check(const RGraph& h, int n, double p,
                                                      double delta) {
  SidorenkoTailReport rep;
  rep.on_verified_list = on_verified_sidorenko_list(h);
  TailProblem prob = TailProblem::single(h, n, p, delta, TailDirection::lower);
  TailEstimate est = tail_exact_enum(prob);
  rep.lt = -est.log_prob;
  double qhat = std::pow(1.0 - delta, 1.0 / double(h.num_edges())) * p;
  rep.q = qhat * int_pow(double(n), h.r) / falling_factorial(n, h.r);
  if (rep.q > 1.0) {
    rep.pass = false;
    return rep;
  }
  rep.bound = double(binom(n, h.r)) * relent_scalar(p, rep.q);
  rep.pass = rep.lt >= rep.bound * (1.0 - 1e-12) - 1e-12;
  return rep;
}

}  // namespace hyperreg
