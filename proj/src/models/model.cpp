// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/model.hpp"

#include <cmath>

#include "dignn/dataset.hpp"
#include "dignn/errors.hpp"

namespace dignn {

using nlohmann::json;

EnergyModel::EnergyModel(const ModelConfig& config) : params_(std::make_unique<ParamSet>()) {
  config.validate();
  std::mt19937_64 rng(config.init_seed);
  backbone_ = make_backbone(config, *params_, rng);
  heads_ = AuxHeads(config, backbone_->pooled_size(), *params_, rng);
}

TypedGraph EnergyModel::graph(const ChemicalSystem& system, const BondRuleSet& rules) const {
  if (rules.relations() != config().relations || rules.elements() != config().elements) {
    throw DataError("bond rules do not match the model's element/relation catalogues");
  }
  return build_graph(system, rules, config().graph_connectivity());
}

EnergyModel::Output EnergyModel::forward(const TypedGraph& g, Tape& tape) const {
  Output out;
  out.prediction = backbone_->forward(g, tape);
  out.aux = heads_.forward(tape, out.prediction.pooled);
  return out;
}

double EnergyModel::predict(const TypedGraph& g) const {
  Tape tape = Tape::inference();
  return backbone_->forward(g, tape).energy.item();
}

std::vector<double> EnergyModel::contributions(const TypedGraph& g) const {
  Tape tape = Tape::inference();
  const Tensor& c = backbone_->forward(g, tape).contributions.value();
  return c.values();
}

ParamCounts EnergyModel::count_params() const {
  ParamCounts c = backbone_->count_params();
  c.aux = heads_.count();
  return c;
}

Parameter& EnergyModel::buffer(const char* name) const {
  const std::string prefix = config().backbone == BackboneKind::kSchnet ? "schnet." : "";
  return params_->at(prefix + name);
}

void EnergyModel::set_energy_normalisation(double scale, double shift) {
  if (!std::isfinite(scale) || !std::isfinite(shift) || scale == 0.0) {
    throw ConfigError("energy normalisation needs a finite non-zero scale and finite shift");
  }
  buffer("readout.scale").value.fill(scale);
  buffer("readout.shift").value.fill(shift);
}

double EnergyModel::energy_scale() const { return buffer("readout.scale").value.item(); }
double EnergyModel::energy_shift() const { return buffer("readout.shift").value.item(); }

json EnergyModel::to_checkpoint() const {
  json params = json::object();
  for (const auto& p : *params_) {
    params[p->name] = {{"shape", {p->value.rows(), p->value.cols()}},
                       {"data", p->value.values()}};
  }
  return {{"format", kCheckpointFormat}, {"model", config().to_json()}, {"params", params}};
}

EnergyModel EnergyModel::from_checkpoint(const json& j) {
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw DataError(std::string("not a checkpoint (expected format ") + kCheckpointFormat + ")");
  }
  EnergyModel m(ModelConfig::from_json(j.at("model")));
  const json& params = j.at("params");
  for (auto& p : *m.params_) {
    if (!params.contains(p->name)) throw DataError("checkpoint is missing '" + p->name + "'");
    const json& e = params.at(p->name);
    const auto shape = e.at("shape").get<std::vector<int>>();
    auto data = e.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] != p->value.rows() || shape[1] != p->value.cols() ||
        data.size() != static_cast<std::size_t>(shape[0]) * shape[1]) {
      throw DataError("checkpoint entry '" + p->name + "' has shape/data mismatch against " +
                      p->value.shape_str());
    }
    p->value = Tensor(shape[0], shape[1], std::move(data));
  }
  if (params.size() != m.params_->size()) {
    throw DataError("checkpoint has " + std::to_string(params.size()) + " entries, model expects " +
                    std::to_string(m.params_->size()));
  }
  return m;
}

void EnergyModel::save(const std::filesystem::path& path) const {
  write_text(path, to_checkpoint().dump());
}

EnergyModel EnergyModel::load(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_checkpoint(j);
}

}  // namespace dignn
