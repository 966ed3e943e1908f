#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hyperreg/base.hpp"
#include "hyperreg/decomposition.hpp"
#include "hyperreg/delta_prime.hpp"
#include "hyperreg/dual_norm.hpp"
#include "hyperreg/hypergraph.hpp"
#include "hyperreg/tails.hpp"
#include "hyperreg/tensor.hpp"
#include "hyperreg/variational.hpp"

namespace hyperreg {

using json = nlohmann::json;

inline json graph_to_json(const RGraph& g) {
  json j;
  j["r"] = g.r;
  j["vertices"] = g.num_vertices;
  j["edges"] = g.edges;
  return j;
}

inline RGraph graph_from_json(const json& j) {
  RGraph g(j.at("r").get<int>(), j.at("vertices").get<int>(),
           j.at("edges").get<std::vector<Edge>>());
  return g;
}

inline json tensor_to_json(const SymTensor& t) {
  json j;
  j["n"] = t.n();
  j["r"] = t.r();
  json entries = json::array();
  for (std::size_t i = 0; i < t.num_subsets(); ++i) {
    double v = t.get_by_rank(i);
    if (v == 0.0) continue;
    json row = json::array();
    for (int u : t.subsets()[i]) row.push_back(u);
    row.push_back(v);
    entries.push_back(std::move(row));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline SymTensor tensor_from_json(const json& j) {
  int n = j.at("n").get<int>();
  int r = j.at("r").get<int>();
  SymTensor t(n, r);
  for (const auto& row : j.at("entries")) {
    if (int(row.size()) != r + 1) throw std::invalid_argument("tensor json: bad entry arity");
    Edge sub;
    for (int i = 0; i < r; ++i) sub.push_back(row[i].get<int>());
    std::sort(sub.begin(), sub.end());
    t.set(sub, row[r].get<double>());
  }
  return t;
}

inline std::string member_key(const Edge& verts) {
  std::string key;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    if (i) key += ",";
    key += std::to_string(verts[i]);
  }
  return key;
}

inline json base_to_json(const WeightedBase& wb) {
  json j;
  j["edge"] = wb.edge;
  json members = json::array();
  json weights = json::object();
  for (const auto& m : wb.members) {
    members.push_back(m.verts);
    weights[member_key(m.verts)] = m.d_b;
  }
  j["members"] = std::move(members);
  j["d_star"] = wb.d_star;
  j["d_b"] = std::move(weights);
  return j;
}

inline WeightedBase base_from_json(const json& j) {
  Edge edge = j.at("edge").get<Edge>();
  std::vector<Edge> members = j.at("members").get<std::vector<Edge>>();
  std::vector<int> ws;
  for (auto& m : members) {
    std::sort(m.begin(), m.end());
    ws.push_back(j.at("d_b").at(member_key(m)).get<int>());
  }
  return WeightedBase::make(int(edge.size()), edge, members, j.at("d_star").get<int>(), ws);
}

inline json test_tensor_to_json(const TestTensor& t) {
  json j;
  j["n"] = t.n;
  j["base"] = base_to_json(t.base);
  json supports = json::array();
  for (std::size_t f = 0; f < t.factors.size(); ++f) {
    json sup = json::array();
    std::size_t arity = t.base.members[f].positions.size();
    for (std::size_t code = 0; code < t.factors[f].size(); ++code) {
      if (!t.factors[f][code]) continue;
      json tup = json::array();
      std::size_t rem = code;
      std::vector<int> coords(arity, 0);
      for (std::size_t k = arity; k-- > 0;) {
        coords[k] = int(rem % std::size_t(t.n));
        rem /= std::size_t(t.n);
      }
      for (int c : coords) tup.push_back(c);
      sup.push_back(std::move(tup));
    }
    supports.push_back(std::move(sup));
  }
  j["factor_supports"] = std::move(supports);
  return j;
}

inline TestTensor test_tensor_from_json(const json& j) {
  WeightedBase wb = base_from_json(j.at("base"));
  TestTensor t = TestTensor::zeros(wb, j.at("n").get<int>());
  const auto& sups = j.at("factor_supports");
  if (sups.size() != t.factors.size())
    throw std::invalid_argument("test tensor json: factor count mismatch");
  for (std::size_t f = 0; f < t.factors.size(); ++f) {
    for (const auto& tup : sups[f]) {
      std::size_t code = 0;
      for (const auto& c : tup) code = code * std::size_t(t.n) + std::size_t(c.get<int>());
      t.factors[f][code] = 1;
    }
  }
  return t;
}

inline json certificate_to_json(const NormCertificate& c) {
  json j;
  j["value"] = c.value;
  j["mode"] = (c.mode == NormMode::exact) ? "exact" : "heuristic-lower-bound";
  if (c.has_witness) j["witness"] = test_tensor_to_json(c.witness);
  return j;
}

inline json delta_prime_to_json(const RGraph& g, const DeltaPrimeCertificate& cert) {
  json j;
  j["value"] = cert.value.str();
  j["value_real"] = cert.value.to_double();
  json per_edge = json::array();
  for (const auto& [base, cost] : cert.per_edge) {
    json e;
    e["edge"] = base.edge;
    e["delta_prime"] = cost.str();
    e["base_members"] = base.members;
    per_edge.push_back(std::move(e));
  }
  j["per_edge"] = std::move(per_edge);
  j["graph"] = graph_to_json(g);
  return j;
}

inline json decomposition_to_json(const DecompositionResult& res) {
  json j;
  j["status"] = to_string(res.status);
  j["alphas"] = res.alphas;
  json tests = json::array();
  for (const auto& st : res.steps) {
    json s = test_tensor_to_json(st.test);
    s["correlation"] = st.correlation;
    s["size"] = st.size;
    s["ortho_distance"] = st.ortho_distance;
    s["certified"] = st.certified;
    tests.push_back(std::move(s));
  }
  j["tests"] = std::move(tests);
  j["budget_used"] = res.budget_used;
  j["budget_limit"] = res.budget_limit;
  j["residual_norm_certificate"] = {
      {"value", res.final_residual_norm},
      {"certified_small", res.residual_certified_small},
  };
  return j;
}

inline json solution_to_json(const VariationalSolution& sol, double p) {
  json j;
  j["value"] = sol.value;
  j["method"] = sol.method;
  j["residuals"] = sol.residuals;
  j["optimizer"] = tensor_to_json(sol.q);
  (void)p;
  return j;
}

inline json estimate_to_json(const TailEstimate& est) {
  json j;
  j["prob"] = est.prob;
  j["log_prob"] = est.log_prob;
  j["method"] = est.method;
  j["exact"] = est.exact;
  if (!est.exact) {
    j["stderr"] = est.stderr_prob;
    j["samples"] = est.samples;
    j["seed"] = est.seed;
  }
  if (est.ess > 0) j["ess"] = est.ess;
  return j;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return j;
}

/// Accepts a builtin spec ("clique:4:2", "fano", ...) or a JSON file path.
inline RGraph load_graph(const std::string& spec) {
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json")
    return graph_from_json(load_json_file(spec));
  try {
    return builtin_graph(spec);
  } catch (const std::invalid_argument&) {
    return graph_from_json(load_json_file(spec));
  }
}

inline SymTensor load_tensor(const std::string& path) {
  json j = load_json_file(path);
  if (j.contains("entries")) return tensor_from_json(j);
  // Boolean tensors may arrive as hypergraph JSON
  RGraph g = graph_from_json(j);
  return adjacency_tensor(g, g.num_vertices);
}

}  // namespace hyperreg
