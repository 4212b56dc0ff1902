// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/graph.hpp"

#include <algorithm>
#include <cmath>

#include "dignn/errors.hpp"

namespace dignn {

BondRuleSet::BondRuleSet(std::vector<std::string> elements, std::vector<std::string> relations)
    : elements_(std::move(elements)), relations_(std::move(relations)) {}

std::pair<std::string, std::string> BondRuleSet::key(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void BondRuleSet::set_rule(const std::string& a, const std::string& b, BondRule rule) {
  if (!(rule.r0 > 0.0) || !(rule.multiplier > 0.0)) {
    throw ConfigError("bond rule " + a + "-" + b + " needs positive r0 and multiplier");
  }
  if (relation_index(rule.bond_type) < 0 || rule.bond_type == kNoBond) {
    throw ConfigError("bond rule " + a + "-" + b + " uses unknown bond type '" + rule.bond_type +
                      "'");
  }
  rules_[key(a, b)] = std::move(rule);
}

bool BondRuleSet::has_rule(const std::string& a, const std::string& b) const {
  return rules_.count(key(a, b)) > 0;
}

const BondRule& BondRuleSet::rule(const std::string& a, const std::string& b) const {
  auto it = rules_.find(key(a, b));
  if (it == rules_.end()) throw ConfigError("no bond rule for element pair " + a + "-" + b);
  return it->second;
}

int BondRuleSet::element_index(const std::string& e) const {
  auto it = std::find(elements_.begin(), elements_.end(), e);
  if (it == elements_.end()) throw ConfigError("element '" + e + "' is not in the catalogue");
  return static_cast<int>(it - elements_.begin());
}

int BondRuleSet::relation_index(const std::string& label) const {
  auto it = std::find(relations_.begin(), relations_.end(), label);
  return it == relations_.end() ? -1 : static_cast<int>(it - relations_.begin());
}

BondRuleSet BondRuleSet::crystals(double multiplier) {
  BondRuleSet rs({"Al", "Cu"}, {"metallic", kNoBond});
  const double al = 4.05 / std::sqrt(2.0);
  const double cu = 3.61 / std::sqrt(2.0);
  rs.set_rule("Al", "Al", {al, multiplier, "metallic"});
  rs.set_rule("Cu", "Cu", {cu, multiplier, "metallic"});
  rs.set_rule("Al", "Cu", {0.5 * (al + cu), multiplier, "metallic"});
  return rs;
}

BondRuleSet BondRuleSet::molecules(double multiplier) {
  BondRuleSet rs({"H", "C", "N", "O"}, {"single", "double", kNoBond});
  rs.set_rule("H", "H", {0.74, multiplier, "single"});
  rs.set_rule("H", "C", {1.09, multiplier, "single"});
  rs.set_rule("H", "N", {1.01, multiplier, "single"});
  rs.set_rule("H", "O", {0.96, multiplier, "single"});
  rs.set_rule("C", "C", {1.54, multiplier, "single"});
  rs.set_rule("C", "N", {1.47, multiplier, "single"});
  rs.set_rule("C", "O", {1.21, multiplier, "double"});
  rs.set_rule("N", "N", {1.25, multiplier, "double"});
  rs.set_rule("N", "O", {1.21, multiplier, "double"});
  rs.set_rule("O", "O", {1.48, multiplier, "single"});
  return rs;
}

BondTable assign_bond_types(const ChemicalSystem& system, const BondRuleSet& rules) {
  const Tensor d = pairwise_distances(system);
  const double inv_scale = 1.0 / system.scale_or_one();
  BondTable t;
  t.n = static_cast<int>(system.size());
  t.labels.assign(static_cast<std::size_t>(t.n) * t.n, BondTable::kUnbonded);
  for (int i = 0; i < t.n; ++i) {
    for (int j = i + 1; j < t.n; ++j) {
      const BondRule& r = rules.rule(system.elements[i], system.elements[j]);
      const double stable = d(i, j) * inv_scale;
      if (stable <= r.multiplier * r.r0) {
        const int label = rules.relation_index(r.bond_type);
        t.labels[static_cast<std::size_t>(i) * t.n + j] = label;
        t.labels[static_cast<std::size_t>(j) * t.n + i] = label;
      }
    }
  }
  return t;
}

std::string to_string(Connectivity c) {
  return c == Connectivity::kBondedOnly ? "bonded" : "full";
}

Connectivity parse_connectivity(const std::string& s) {
  if (s == "bonded") return Connectivity::kBondedOnly;
  if (s == "full") return Connectivity::kFullyConnected;
  throw ConfigError("unknown connectivity '" + s + "' (expected bonded|full)");
}

std::vector<int> TypedGraph::neighbours(int v, int r) const {
  std::vector<int> out;
  for (int e = 0; e < num_directed(); ++e) {
    if (dst[e] == v && (r < 0 || edges[undirected[e]].relation == r)) out.push_back(src[e]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void TypedGraph::finalize() {
  src.clear();
  dst.clear();
  undirected.clear();
  by_relation.assign(relations.size(), {});
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (e.relation < 0 || e.relation >= num_relations()) {
      throw DataError("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                      " has relation index " + std::to_string(e.relation) +
                      " outside the catalogue");
    }
    const int base = static_cast<int>(src.size());
    src.push_back(e.u);
    dst.push_back(e.v);
    src.push_back(e.v);
    dst.push_back(e.u);
    undirected.push_back(static_cast<int>(k));
    undirected.push_back(static_cast<int>(k));
    by_relation[e.relation].push_back(base);
    by_relation[e.relation].push_back(base + 1);
  }
}

TypedGraph build_graph(const ChemicalSystem& system, const BondRuleSet& rules, Connectivity mode) {
  return build_graph(system, rules, mode, assign_bond_types(system, rules));
}

TypedGraph build_graph(const ChemicalSystem& system, const BondRuleSet& rules, Connectivity mode,
                       const BondTable& labels) {
  const Tensor d = pairwise_distances(system);
  const int n = static_cast<int>(system.size());
  if (labels.n != n) throw DataError("bond table size does not match the system");
  TypedGraph g;
  g.num_nodes = n;
  g.elements = rules.elements();
  g.relations = rules.relations();
  g.mode = mode;
  g.node_features = Tensor(n, static_cast<int>(g.elements.size()));
  for (int i = 0; i < n; ++i) {
    const int e = rules.element_index(system.elements[i]);
    g.node_element.push_back(e);
    g.node_features(i, e) = 1.0;
  }
  const int no_bond = rules.no_bond_index();
  if (mode == Connectivity::kFullyConnected && no_bond < 0) {
    throw ConfigError("fully-connected graphs need a '" + std::string(kNoBond) +
                      "' relation in the catalogue");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int rel = labels.label(i, j);
      if (rel == BondTable::kUnbonded) {
        if (mode == Connectivity::kBondedOnly) continue;
        rel = no_bond;
      }
      g.edges.push_back({i, j, rel, d(i, j)});
    }
  }
  g.finalize();
  return g;
}

}  // namespace dignn
