// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/model_config.hpp"

#include <algorithm>

#include "dignn/errors.hpp"
#include "dignn/json_util.hpp"

namespace dignn {

using nlohmann::json;

std::string to_string(BackboneKind b) { return b == BackboneKind::kMpnn ? "mpnn" : "schnet"; }

std::string to_string(Specialisation s) {
  switch (s) {
    case Specialisation::kNone: return "none";
    case Specialisation::kMessage: return "message";
    case Specialisation::kWeightScalar: return "weight-scalar";
    case Specialisation::kWeightVector: return "weight-vector";
    case Specialisation::kUpdateSeparate: return "update-separate";
    case Specialisation::kUpdateConcat: return "update-concat";
    case Specialisation::kUpdateShared: return "update-shared";
  }
  return "none";
}

std::string to_string(AuxTask t) {
  switch (t) {
    case AuxTask::kAtomCounts: return "atoms";
    case AuxTask::kOrbitalCounts: return "orbitals";
    case AuxTask::kScalingDistribution: return "scaling";
  }
  return "atoms";
}

BackboneKind parse_backbone(const std::string& s) {
  if (s == "mpnn") return BackboneKind::kMpnn;
  if (s == "schnet") return BackboneKind::kSchnet;
  throw ConfigError("unknown backbone '" + s + "' (expected mpnn|schnet)");
}

Specialisation parse_specialisation(const std::string& s) {
  for (auto v : {Specialisation::kNone, Specialisation::kMessage, Specialisation::kWeightScalar,
                 Specialisation::kWeightVector, Specialisation::kUpdateSeparate,
                 Specialisation::kUpdateConcat, Specialisation::kUpdateShared}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown specialisation '" + s + "'");
}

AuxTask parse_aux_task(const std::string& s) {
  for (auto v : {AuxTask::kAtomCounts, AuxTask::kOrbitalCounts, AuxTask::kScalingDistribution}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown auxiliary task '" + s + "' (expected atoms|orbitals|scaling)");
}

ModelConfig ModelConfig::mpnn(std::vector<std::string> elements,
                              std::vector<std::string> relations) {
  ModelConfig c;
  c.backbone = BackboneKind::kMpnn;
  c.elements = std::move(elements);
  c.relations = std::move(relations);
  c.state_size = 73;
  return c;
}

ModelConfig ModelConfig::schnet(std::vector<std::string> elements,
                                std::vector<std::string> relations) {
  ModelConfig c;
  c.backbone = BackboneKind::kSchnet;
  c.elements = std::move(elements);
  c.relations = std::move(relations);
  c.state_size = 128;
  c.connectivity = Connectivity::kFullyConnected;
  return c;
}

bool ModelConfig::has_task(AuxTask t) const {
  return std::find(aux_tasks.begin(), aux_tasks.end(), t) != aux_tasks.end();
}

Connectivity ModelConfig::graph_connectivity() const {
  return backbone == BackboneKind::kSchnet ? Connectivity::kFullyConnected : connectivity;
}

void ModelConfig::validate() const {
  if (elements.empty()) throw ConfigError("model needs a non-empty element catalogue");
  if (relations.empty()) throw ConfigError("model needs a non-empty relation catalogue");
  if (state_size < 1 || depth < 1) throw ConfigError("state size and depth must be positive");
  if (backbone == BackboneKind::kMpnn) {
    if (state_size < static_cast<int>(elements.size())) {
      throw ConfigError("MPNN state size must be at least the number of element types");
    }
    if (edge_hidden < 1 || readout_hidden < 1) throw ConfigError("MPNN widths must be positive");
  } else {
    if (specialisation == Specialisation::kUpdateConcat ||
        specialisation == Specialisation::kUpdateShared) {
      throw ConfigError("specialisation '" + to_string(specialisation) +
                        "' needs a recurrent update and is MPNN-only");
    }
    if (state_size < 2) throw ConfigError("SchNet state size must be >= 2");
    rbf.centers();
    if (std::find(relations.begin(), relations.end(), kNoBond) == relations.end()) {
      throw ConfigError("SchNet runs on fully-connected graphs and needs a 'no-bond' relation");
    }
  }
  if (has_task(AuxTask::kScalingDistribution) && scaling_bins < 1) {
    throw ConfigError("scaling distribution head needs at least one bin");
  }
}

json ModelConfig::to_json() const {
  json tasks = json::array();
  for (auto t : aux_tasks) tasks.push_back(to_string(t));
  return {{"backbone", to_string(backbone)},
          {"specialisation", to_string(specialisation)},
          {"elements", elements},
          {"relations", relations},
          {"state_size", state_size},
          {"depth", depth},
          {"edge_hidden", edge_hidden},
          {"readout_hidden", readout_hidden},
          {"bond_type_feature", bond_type_feature},
          {"connectivity", to_string(connectivity)},
          {"rbf", {{"start", rbf.start}, {"stop", rbf.stop}, {"count", rbf.count},
                   {"gamma", rbf.gamma}}},
          {"tie_alpha", tie_alpha},
          {"literal_message", literal_message},
          {"aux_tasks", tasks},
          {"scaling_bins", scaling_bins},
          {"init_seed", init_seed}};
}

ModelConfig ModelConfig::from_json(const json& j) {
  require_known_keys(j,
                     {"backbone", "specialisation", "elements", "relations", "state_size", "depth",
                      "edge_hidden", "readout_hidden", "bond_type_feature", "connectivity", "rbf",
                      "tie_alpha", "literal_message", "aux_tasks", "scaling_bins", "init_seed"},
                     "model");
  const auto backbone = parse_backbone(get_or<std::string>(j, "backbone", "mpnn"));
  const auto elements = get_or<std::vector<std::string>>(j, "elements", {});
  const auto relations = get_or<std::vector<std::string>>(j, "relations", {});
  ModelConfig c = backbone == BackboneKind::kMpnn ? mpnn(elements, relations)
                                                  : schnet(elements, relations);
  c.specialisation = parse_specialisation(get_or<std::string>(j, "specialisation", "none"));
  c.state_size = get_or(j, "state_size", c.state_size);
  c.depth = get_or(j, "depth", c.depth);
  c.edge_hidden = get_or(j, "edge_hidden", c.edge_hidden);
  c.readout_hidden = get_or(j, "readout_hidden", c.readout_hidden);
  c.bond_type_feature = get_or(j, "bond_type_feature", c.bond_type_feature);
  c.connectivity = parse_connectivity(get_or<std::string>(j, "connectivity",
                                                          to_string(c.connectivity)));
  if (j.contains("rbf")) {
    const json& r = j["rbf"];
    require_known_keys(r, {"start", "stop", "count", "gamma"}, "model.rbf");
    c.rbf.start = get_or(r, "start", c.rbf.start);
    c.rbf.stop = get_or(r, "stop", c.rbf.stop);
    c.rbf.count = get_or(r, "count", c.rbf.count);
    c.rbf.gamma = get_or(r, "gamma", c.rbf.gamma);
  }
  c.tie_alpha = get_or(j, "tie_alpha", c.tie_alpha);
  c.literal_message = get_or(j, "literal_message", c.literal_message);
  for (const auto& t : get_or<std::vector<std::string>>(j, "aux_tasks", {})) {
    c.aux_tasks.push_back(parse_aux_task(t));
  }
  c.scaling_bins = get_or(j, "scaling_bins", c.scaling_bins);
  c.init_seed = get_or<std::uint64_t>(j, "init_seed", c.init_seed);
  c.validate();
  return c;
}

}  // namespace dignn
