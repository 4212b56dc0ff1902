// Copyright 2026 The dignn Authors. Apache 2.0 License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dignn/graph.hpp"
#include "dignn/layers.hpp"

namespace dignn {

enum class BackboneKind { kMpnn, kSchnet };

// How relation types enter the network. At most one is active per model.
//   kMessage         per-relation message kernels blended with the generic one
//   kWeightScalar    per-relation scalar weights on aggregated messages
//   kWeightVector    per-relation elementwise weights on aggregated messages
//   kUpdateSeparate  one update function per relation, contributions summed
//   kUpdateConcat    one recurrent cell over concatenated per-relation messages
//   kUpdateShared    as kUpdateConcat with input blocks tied across relations
enum class Specialisation {
  kNone,
  kMessage,
  kWeightScalar,
  kWeightVector,
  kUpdateSeparate,
  kUpdateConcat,
  kUpdateShared,
};

enum class AuxTask { kAtomCounts, kOrbitalCounts, kScalingDistribution };

std::string to_string(BackboneKind b);
std::string to_string(Specialisation s);
std::string to_string(AuxTask t);
BackboneKind parse_backbone(const std::string& s);
Specialisation parse_specialisation(const std::string& s);
AuxTask parse_aux_task(const std::string& s);

struct ModelConfig {
  BackboneKind backbone = BackboneKind::kMpnn;
  Specialisation specialisation = Specialisation::kNone;
  std::vector<std::string> elements;   // node feature catalogue
  std::vector<std::string> relations;  // relation catalogue
  int state_size = 73;                 // 73 for MPNN, 128 for SchNet by default
  int depth = 3;                       // MPNN iterations / SchNet interaction layers
  // MPNN
  int edge_hidden = 128;
  int readout_hidden = 128;
  bool bond_type_feature = false;
  Connectivity connectivity = Connectivity::kBondedOnly;
  // SchNet
  RbfGrid rbf;
  bool tie_alpha = false;
  bool literal_message = false;
  // auxiliary heads
  std::vector<AuxTask> aux_tasks;
  int scaling_bins = 13;
  std::uint64_t init_seed = 0;

  // Backbone defaults for the given catalogues.
  static ModelConfig mpnn(std::vector<std::string> elements, std::vector<std::string> relations);
  static ModelConfig schnet(std::vector<std::string> elements,
                            std::vector<std::string> relations);

  bool has_task(AuxTask t) const;
  Connectivity graph_connectivity() const;
  void validate() const;

  nlohmann::json to_json() const;
  // Unknown keys are rejected.
  static ModelConfig from_json(const nlohmann::json& j);
};

}  // namespace dignn
