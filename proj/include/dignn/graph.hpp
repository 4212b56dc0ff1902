// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Bond typing and typed-graph construction. Relation labels are decided by
// distance thresholds on the stable geometry (coordinates divided by the
// system's recorded scaling), so every copy in a scaling sweep shares one
// relation structure.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dignn/system.hpp"
#include "dignn/tensor.hpp"

namespace dignn {

inline constexpr const char* kNoBond = "no-bond";

struct BondRule {
  double r0 = 0.0;           // equilibrium distance, angstrom
  double multiplier = 1.2;   // bonded iff d <= multiplier * r0
  std::string bond_type;     // label in the relation catalogue
};

class BondRuleSet {
 public:
  BondRuleSet() = default;
  BondRuleSet(std::vector<std::string> elements, std::vector<std::string> relations);

  // Rules are symmetric in the element pair.
  void set_rule(const std::string& a, const std::string& b, BondRule rule);
  const BondRule& rule(const std::string& a, const std::string& b) const;
  bool has_rule(const std::string& a, const std::string& b) const;

  const std::vector<std::string>& elements() const { return elements_; }
  const std::vector<std::string>& relations() const { return relations_; }
  int element_index(const std::string& e) const;
  // -1 if the label is not in the catalogue.
  int relation_index(const std::string& label) const;
  int no_bond_index() const { return relation_index(kNoBond); }
  const std::map<std::pair<std::string, std::string>, BondRule>& rules() const { return rules_; }

  // Al/Cu fcc crystals: relations {metallic, no-bond}.
  static BondRuleSet crystals(double multiplier = 1.2);
  // H/C/N/O tree molecules: relations {single, double, no-bond}.
  static BondRuleSet molecules(double multiplier = 1.2);

 private:
  static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);
  std::vector<std::string> elements_;
  std::vector<std::string> relations_;
  std::map<std::pair<std::string, std::string>, BondRule> rules_;
};

// Symmetric pair labels. label(i, j) is a catalogue index, or kUnbonded when
// the pair is beyond its threshold.
struct BondTable {
  static constexpr int kUnbonded = -1;
  int n = 0;
  std::vector<int> labels;
  int label(int i, int j) const { return labels[static_cast<std::size_t>(i) * n + j]; }
};

// Throws ConfigError naming the pair if a rule is missing.
BondTable assign_bond_types(const ChemicalSystem& system, const BondRuleSet& rules);

enum class Connectivity { kBondedOnly, kFullyConnected };
std::string to_string(Connectivity c);
Connectivity parse_connectivity(const std::string& s);

struct Edge {
  int u = 0;
  int v = 0;
  int relation = 0;
  double distance = 0.0;
};

// Undirected typed graph. Message passing walks each undirected edge in
// both directions; directed edge 2k runs u->v of edge k and 2k+1 runs v->u.
struct TypedGraph {
  int num_nodes = 0;
  std::vector<std::string> elements;   // element catalogue
  std::vector<std::string> relations;  // relation catalogue
  std::vector<int> node_element;       // catalogue index per node
  Tensor node_features;                // one-hot, num_nodes x |elements|
  std::vector<Edge> edges;
  Connectivity mode = Connectivity::kBondedOnly;

  // Directed views: message flows src -> dst.
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> undirected;                  // directed -> undirected edge index
  std::vector<std::vector<int>> by_relation;    // relation -> directed edge ids

  int num_relations() const { return static_cast<int>(relations.size()); }
  int num_directed() const { return static_cast<int>(src.size()); }
  // N_v^r as node ids (r < 0 means all relations).
  std::vector<int> neighbours(int v, int r = -1) const;
  void finalize();  // rebuilds the directed views from edges
};

// Bonded-only mode drops unbonded pairs; fully-connected mode keeps them
// under the catalogue's no-bond relation (which must then exist).
TypedGraph build_graph(const ChemicalSystem& system, const BondRuleSet& rules, Connectivity mode);
// Same, with relation labels supplied explicitly (e.g. frozen from another
// geometry).
TypedGraph build_graph(const ChemicalSystem& system, const BondRuleSet& rules, Connectivity mode,
                       const BondTable& labels);

}  // namespace dignn
