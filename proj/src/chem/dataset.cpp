// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/dataset.hpp"

#include <fstream>
#include <sstream>

#include "dignn/errors.hpp"

namespace dignn {

using nlohmann::json;

json system_to_json(const ChemicalSystem& s) {
  json j;
  j["elements"] = s.elements;
  json coords = json::array();
  for (const auto& c : s.coords) coords.push_back({c[0], c[1], c[2]});
  j["coords"] = std::move(coords);
  j["energy"] = s.energy ? json(*s.energy) : json(nullptr);
  j["scaling"] = s.scaling ? json(*s.scaling) : json(nullptr);
  j["provenance"] = {{"dataset", s.provenance.dataset},
                     {"seed", s.provenance.seed},
                     {"geometry_id", s.provenance.geometry_id}};
  return j;
}

ChemicalSystem system_from_json(const json& j) {
  try {
    ChemicalSystem s;
    s.elements = j.at("elements").get<std::vector<std::string>>();
    for (const auto& c : j.at("coords")) {
      if (c.size() != 3) throw DataError("coordinate entry must have 3 components");
      s.coords.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    }
    if (j.contains("energy") && !j["energy"].is_null()) s.energy = j["energy"].get<double>();
    if (j.contains("scaling") && !j["scaling"].is_null()) s.scaling = j["scaling"].get<double>();
    if (j.contains("provenance")) {
      const json& p = j["provenance"];
      s.provenance.dataset = p.value("dataset", "");
      s.provenance.seed = p.value("seed", std::uint64_t{0});
      s.provenance.geometry_id = p.value("geometry_id", "");
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed system record: ") + e.what());
  }
}

json rules_to_json(const BondRuleSet& rules) {
  json pairs = json::array();
  for (const auto& [k, r] : rules.rules()) {
    pairs.push_back({{"a", k.first},
                     {"b", k.second},
                     {"r0", r.r0},
                     {"multiplier", r.multiplier},
                     {"bond_type", r.bond_type}});
  }
  return {{"elements", rules.elements()}, {"relations", rules.relations()}, {"pairs", pairs}};
}

BondRuleSet rules_from_json(const json& j) {
  try {
    BondRuleSet rs(j.at("elements").get<std::vector<std::string>>(),
                   j.at("relations").get<std::vector<std::string>>());
    for (const auto& p : j.at("pairs")) {
      rs.set_rule(p.at("a").get<std::string>(), p.at("b").get<std::string>(),
                  {p.at("r0").get<double>(), p.at("multiplier").get<double>(),
                   p.at("bond_type").get<std::string>()});
    }
    return rs;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed bond rule set: ") + e.what());
  }
}

json dataset_to_json(const Dataset& d) {
  json systems = json::array();
  for (const auto& s : d.systems) systems.push_back(system_to_json(s));
  return {{"metadata", d.metadata}, {"systems", std::move(systems)}};
}

Dataset dataset_from_json(const json& j) {
  if (!j.is_object() || !j.contains("systems") || !j.contains("metadata")) {
    throw DataError("dataset document needs 'metadata' and 'systems'");
  }
  Dataset d;
  d.metadata = j["metadata"];
  for (const auto& s : j["systems"]) d.systems.push_back(system_from_json(s));
  return d;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write '" + path.string() + "'");
  out << text;
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  write_text(path, dataset_to_json(d).dump() + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw UsageError("dataset '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return dataset_from_json(j);
}

BondRuleSet dataset_rules(const Dataset& d) {
  if (!d.metadata.contains("rules")) throw DataError("dataset metadata has no bond rules");
  return rules_from_json(d.metadata["rules"]);
}

}  // namespace dignn
