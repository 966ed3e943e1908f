#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperreg/util.hpp"

namespace hyperreg {

using Edge = std::vector<int>;  // sorted list of r distinct vertex labels

/// Finite simple r-uniform hypergraph on vertex labels 0..num_vertices-1.
struct RGraph {
  int r = 2;
  int num_vertices = 0;
  std::vector<Edge> edges;  // each sorted, whole list sorted, no duplicates

  RGraph() = default;
  RGraph(int r_, int nv, std::vector<Edge> es) : r(r_), num_vertices(nv), edges(std::move(es)) {
    normalize();
    validate();
  }

  int num_edges() const { return int(edges.size()); }

  void normalize() {
    for (auto& e : edges) std::sort(e.begin(), e.end());
    std::sort(edges.begin(), edges.end());
  }

  void validate() const {
    if (r < 1) throw std::invalid_argument("rgraph: uniformity must be positive");
    if (num_vertices < 0) throw std::invalid_argument("rgraph: negative vertex count");
    for (const auto& e : edges) {
      if (int(e.size()) != r) throw std::invalid_argument("rgraph: edge of wrong size");
      for (std::size_t i = 0; i + 1 < e.size(); ++i)
        if (e[i] == e[i + 1]) throw std::invalid_argument("rgraph: repeated vertex in edge");
      if (e.front() < 0 || e.back() >= num_vertices)
        throw std::invalid_argument("rgraph: vertex label out of range");
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      if (edges[i] == edges[i + 1]) throw std::invalid_argument("rgraph: repeated edge");
  }

  int degree(int v) const {
    int d = 0;
    for (const auto& e : edges)
      if (std::binary_search(e.begin(), e.end(), v)) ++d;
    return d;
  }

  bool has_edge(const Edge& e_sorted) const {
    return std::binary_search(edges.begin(), edges.end(), e_sorted);
  }

  friend bool operator==(const RGraph& a, const RGraph& b) {
    return a.r == b.r && a.num_vertices == b.num_vertices && a.edges == b.edges;
  }
};

/// (H, xi): edges labelled +1/-1; H_+ and H_- partition the edge set.
struct SignedRGraph {
  RGraph graph;
  std::map<Edge, int> sign;  // edge -> +1 / -1

  SignedRGraph() = default;
  SignedRGraph(RGraph g, std::map<Edge, int> s) : graph(std::move(g)), sign(std::move(s)) {
    validate();
  }

  void validate() const {
    if (sign.size() != graph.edges.size())
      throw std::invalid_argument("signed rgraph: sign map does not match edge set");
    for (const auto& e : graph.edges) {
      auto it = sign.find(e);
      if (it == sign.end()) throw std::invalid_argument("signed rgraph: missing sign");
      if (it->second != 1 && it->second != -1)
        throw std::invalid_argument("signed rgraph: sign must be +1 or -1");
    }
  }

  RGraph positive_part() const { return part(+1); }
  RGraph negative_part() const { return part(-1); }

 private:
  RGraph part(int s) const {
    std::vector<Edge> es;
    for (const auto& e : graph.edges)
      if (sign.at(e) == s) es.push_back(e);
    return RGraph(graph.r, graph.num_vertices, std::move(es));
  }
};

inline SignedRGraph all_positive(const RGraph& g) {
  std::map<Edge, int> s;
  for (const auto& e : g.edges) s[e] = 1;
  return SignedRGraph(g, std::move(s));
}

// -------- degree / boundary statistics --------

inline int max_degree(const RGraph& g) {
  int m = 0;
  for (int v = 0; v < g.num_vertices; ++v) m = std::max(m, g.degree(v));
  return m;
}

inline bool sets_intersect(const Edge& a, const Edge& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j])
      ++i;
    else
      ++j;
  }
  return false;
}

inline bool subset_of(const Edge& a, const Edge& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline Edge set_difference(const Edge& a, const Edge& b) {
  Edge out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline Edge set_intersection(const Edge& a, const Edge& b) {
  Edge out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Edge boundary of U: edges e != U with e cap U nonempty.
inline std::vector<Edge> edge_boundary(const RGraph& g, const Edge& u_sorted) {
  std::vector<Edge> out;
  for (const auto& e : g.edges) {
    if (e == u_sorted) continue;
    if (sets_intersect(e, u_sorted)) out.push_back(e);
  }
  return out;
}

inline int boundary_degree(const RGraph& g, const Edge& u_sorted) {
  return int(edge_boundary(g, u_sorted).size());
}

/// b-dominated boundary of U: edges whose nonempty overlap with U sits inside b.
/// Empty b yields the empty set by convention.
inline std::vector<Edge> dominated_boundary(const RGraph& g, const Edge& u_sorted,
                                            const Edge& b_sorted) {
  if (!subset_of(b_sorted, u_sorted))
    throw std::invalid_argument("dominated_boundary: b must be a subset of U");
  std::vector<Edge> out;
  if (b_sorted.empty()) return out;
  for (const auto& e : g.edges) {
    if (e == u_sorted) continue;
    Edge ov = set_intersection(e, u_sorted);
    if (!ov.empty() && subset_of(ov, b_sorted)) out.push_back(e);
  }
  return out;
}

/// Delta_s(H): most hyperedges meeting a size-s subset of some edge.
inline int s_degree(const RGraph& g, int s) {
  if (g.edges.empty()) throw std::invalid_argument("s_degree: graph has no edges");
  if (s < 1 || s > g.r) throw std::invalid_argument("s_degree: s must lie in [1,r]");
  int best = 0;
  std::vector<int> pick(s);
  for (const auto& e : g.edges) {
    // iterate over s-subsets U of e
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      Edge u;
      for (int i : pick) u.push_back(e[i]);
      int cnt = 0;
      for (const auto& e2 : g.edges)
        if (sets_intersect(e2, u)) ++cnt;
      best = std::max(best, cnt);
      int i = s - 1;
      while (i >= 0 && pick[i] == g.r - s + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < s; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return best;
}

// -------- builders --------

inline RGraph clique_graph(int k, int r) {
  if (k < r) throw std::invalid_argument("clique: need k >= r");
  std::vector<Edge> es;
  std::vector<int> pick(r);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    es.emplace_back(pick);
    int i = r - 1;
    while (i >= 0 && pick[i] == k - r + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
  return RGraph(r, k, std::move(es));
}

inline RGraph single_edge_graph(int r) { return clique_graph(r, r); }

/// Sunflower: `petals` edges through a common kernel of the given size.
inline RGraph sunflower_graph(int petals, int kernel, int r) {
  if (kernel < 0 || kernel >= r) throw std::invalid_argument("sunflower: kernel size in [0,r)");
  if (petals < 1) throw std::invalid_argument("sunflower: need at least one petal");
  std::vector<Edge> es;
  int next = kernel;
  for (int a = 0; a < petals; ++a) {
    Edge e;
    for (int i = 0; i < kernel; ++i) e.push_back(i);
    for (int i = kernel; i < r; ++i) e.push_back(next++);
    es.push_back(e);
  }
  return RGraph(r, next == kernel ? kernel : next, std::move(es));
}

inline RGraph star_graph(int arms, int r) { return sunflower_graph(arms, 1, r); }

inline RGraph cycle_graph(int len) {
  if (len < 3) throw std::invalid_argument("cycle: length must be >= 3");
  std::vector<Edge> es;
  for (int i = 0; i < len; ++i) es.push_back({i, (i + 1) % len});
  return RGraph(2, len, std::move(es));
}

inline RGraph path_graph(int edges_count) {
  if (edges_count < 1) throw std::invalid_argument("path: need at least one edge");
  std::vector<Edge> es;
  for (int i = 0; i < edges_count; ++i) es.push_back({i, i + 1});
  return RGraph(2, edges_count + 1, std::move(es));
}

inline RGraph matching_graph(int k, int r) {
  std::vector<Edge> es;
  for (int a = 0; a < k; ++a) {
    Edge e;
    for (int i = 0; i < r; ++i) e.push_back(a * r + i);
    es.push_back(e);
  }
  return RGraph(r, k * r, std::move(es));
}

inline RGraph fano_graph() {
  std::vector<Edge> es = {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5},
                          {1, 4, 6}, {2, 3, 6}, {2, 4, 5}};
  return RGraph(3, 7, std::move(es));
}

/// The linear 3-graph obtained by transposing the incidence matrix of K_4:
/// vertices are the 6 pairs of [4], edges collect the pairs through each point.
inline RGraph fig1_graph() {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) pairs.push_back({i, j});
  std::vector<Edge> es;
  for (int v = 0; v < 4; ++v) {
    Edge e;
    for (int idx = 0; idx < int(pairs.size()); ++idx)
      if (pairs[idx].first == v || pairs[idx].second == v) e.push_back(idx);
    es.push_back(e);
  }
  return RGraph(3, 6, std::move(es));
}

// -------- canonical labelling of small graphs --------
// Degree-sequence refinement narrows the candidate permutations; ties are
// broken exhaustively. Intended for the tiny graphs handled by the quotient
// machinery and generator dedup, not for isomorphism at scale.

namespace detail {

inline std::vector<long long> refine_colors(const RGraph& g) {
  std::vector<long long> color(g.num_vertices, 0);
  for (int v = 0; v < g.num_vertices; ++v) color[v] = g.degree(v);
  for (int round = 0; round < g.num_vertices; ++round) {
    std::vector<std::vector<long long>> sig(g.num_vertices);
    for (int v = 0; v < g.num_vertices; ++v) sig[v].push_back(color[v]);
    for (const auto& e : g.edges) {
      std::vector<long long> ec;
      for (int v : e) ec.push_back(color[v]);
      std::sort(ec.begin(), ec.end());
      long long h = 1469598103934665603LL;
      for (long long c : ec) h = h * 1099511628211LL + c;
      for (int v : e) sig[v].push_back(h);
    }
    for (int v = 0; v < g.num_vertices; ++v) std::sort(sig[v].begin(), sig[v].end());
    std::map<std::vector<long long>, long long> remap;
    for (int v = 0; v < g.num_vertices; ++v) remap[sig[v]] = 0;
    long long next = 0;
    for (auto& kv : remap) kv.second = next++;
    std::vector<long long> nc(g.num_vertices);
    for (int v = 0; v < g.num_vertices; ++v) nc[v] = remap[sig[v]];
    if (nc == color) break;
    color = nc;
  }
  return color;
}

inline std::vector<Edge> apply_perm(const RGraph& g, const std::vector<int>& perm) {
  std::vector<Edge> es;
  es.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    Edge f;
    f.reserve(e.size());
    for (int v : e) f.push_back(perm[v]);
    std::sort(f.begin(), f.end());
    es.push_back(std::move(f));
  }
  std::sort(es.begin(), es.end());
  return es;
}

inline void canon_search(const RGraph& g, const std::vector<std::vector<int>>& classes,
                         std::size_t ci, std::vector<int>& perm, int& next_label,
                         std::vector<Edge>& best, bool& have_best) {
  if (ci == classes.size()) {
    auto es = apply_perm(g, perm);
    if (!have_best || es < best) {
      best = std::move(es);
      have_best = true;
    }
    return;
  }
  std::vector<int> cls = classes[ci];
  std::sort(cls.begin(), cls.end());
  std::vector<int> order(cls.size());
  std::iota(order.begin(), order.end(), 0);
  // try every ordering of this color class
  do {
    int saved = next_label;
    for (std::size_t i = 0; i < cls.size(); ++i) perm[cls[order[i]]] = next_label++;
    canon_search(g, classes, ci + 1, perm, next_label, best, have_best);
    next_label = saved;
  } while (std::next_permutation(order.begin(), order.end()));
}

}  // namespace detail

/// Canonical (lexicographically least) edge list over relabellings.
inline std::vector<Edge> canonical_edges(const RGraph& g) {
  auto color = detail::refine_colors(g);
  std::map<long long, std::vector<int>> by_color;
  for (int v = 0; v < g.num_vertices; ++v) by_color[color[v]].push_back(v);
  std::vector<std::vector<int>> classes;
  for (auto& kv : by_color) classes.push_back(kv.second);
  std::vector<int> perm(g.num_vertices, -1);
  int next_label = 0;
  std::vector<Edge> best;
  bool have_best = false;
  detail::canon_search(g, classes, 0, perm, next_label, best, have_best);
  return best;
}

inline bool is_isomorphic(const RGraph& a, const RGraph& b) {
  if (a.r != b.r || a.num_vertices != b.num_vertices || a.edges.size() != b.edges.size())
    return false;
  return canonical_edges(a) == canonical_edges(b);
}

// -------- quotient family --------

/// A quotient image together with the vertex surjection that produced it.
struct Quotient {
  RGraph image;
  std::vector<int> surjection;  // vertex of the source -> vertex of the image
};

namespace detail {

// partitions of [nv] as restricted-growth strings
inline void partitions_rec(int nv, int pos, int max_block, std::vector<int>& assign,
                           const std::function<void(const std::vector<int>&, int)>& emit) {
  if (pos == nv) {
    emit(assign, max_block);
    return;
  }
  for (int blk = 0; blk <= max_block; ++blk) {
    assign[pos] = blk;
    partitions_rec(nv, pos + 1, std::max(max_block, blk + 1), assign, emit);
  }
}

}  // namespace detail

/// All non-isomorphic images under vertex surjections keeping every edge
/// image on r distinct vertices (degenerate images are excluded); repeated
/// edge images collapse. Includes the graph itself.
inline std::vector<Quotient> quotient_family(const RGraph& g, int cap = 10) {
  if (g.num_vertices > cap)
    throw std::invalid_argument("quotient_family: vertex count exceeds cap " + std::to_string(cap));
  std::vector<Quotient> out;
  std::vector<std::vector<Edge>> seen_canon;
  std::vector<int> assign(g.num_vertices, 0);
  std::function<void(const std::vector<int>&, int)> emit = [&](const std::vector<int>& a,
                                                               int blocks) {
    std::set<Edge> im_edges;
    for (const auto& e : g.edges) {
      Edge f;
      f.reserve(e.size());
      for (int v : e) f.push_back(a[v]);
      std::sort(f.begin(), f.end());
      for (std::size_t i = 0; i + 1 < f.size(); ++i)
        if (f[i] == f[i + 1]) return;  // degenerate edge image
      im_edges.insert(std::move(f));
    }
    RGraph img(g.r, blocks, std::vector<Edge>(im_edges.begin(), im_edges.end()));
    auto canon = canonical_edges(img);
    for (std::size_t i = 0; i < seen_canon.size(); ++i)
      if (out[i].image.num_vertices == blocks && seen_canon[i] == canon) return;
    seen_canon.push_back(canon);
    out.push_back({std::move(img), a});
  };
  detail::partitions_rec(g.num_vertices, 0, 0, assign, emit);
  return out;
}

// -------- named builders and parsing --------

/// Accepts "clique:k:r", "star:arms:r", "sunflower:petals:kernel:r",
/// "cycle:len", "path:edges", "matching:k:r", "edge:r", "fano", "fig1".
inline RGraph builtin_graph(const std::string& name) {
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto pos = s.find(':', start);
      if (pos == std::string::npos) {
        parts.push_back(s.substr(start));
        break;
      }
      parts.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
    return parts;
  };
  auto parts = split(name);
  auto num = [&](std::size_t i) { return std::stoi(parts.at(i)); };
  if (parts[0] == "fano") return fano_graph();
  if (parts[0] == "fig1") return fig1_graph();
  if (parts[0] == "clique") return clique_graph(num(1), num(2));
  if (parts[0] == "star") return star_graph(num(1), num(2));
  if (parts[0] == "sunflower") return sunflower_graph(num(1), num(2), num(3));
  if (parts[0] == "cycle") return cycle_graph(num(1));
  if (parts[0] == "path") return path_graph(num(1));
  if (parts[0] == "matching") return matching_graph(num(1), num(2));
  if (parts[0] == "edge") return single_edge_graph(num(1));
  throw std::invalid_argument("unknown builtin graph: " + name);
}

}  // namespace hyperreg
