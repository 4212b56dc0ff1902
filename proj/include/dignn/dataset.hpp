// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Dataset files: one JSON document per dataset,
//   {"metadata": {...generator version, seed, rules...},
//    "systems": [{"elements", "coords", "energy", "scaling", "provenance"}]}

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dignn/graph.hpp"
#include "dignn/system.hpp"

namespace dignn {

inline constexpr const char* kGeneratorVersion = "dignn-gen/1";

struct Dataset {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<ChemicalSystem> systems;
};

nlohmann::json system_to_json(const ChemicalSystem& s);
ChemicalSystem system_from_json(const nlohmann::json& j);

nlohmann::json rules_to_json(const BondRuleSet& rules);
BondRuleSet rules_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const nlohmann::json& j);

void save_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset load_dataset(const std::filesystem::path& path);

// Rule set recorded in a dataset's metadata ("rules").
BondRuleSet dataset_rules(const Dataset& d);

// Whole-file helpers shared by the CLI and harness.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dignn
