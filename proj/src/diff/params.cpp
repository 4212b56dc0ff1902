// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/params.hpp"

#include <cmath>

#include "dignn/errors.hpp"

namespace dignn {

Parameter& ParamSet::add(const std::string& name, int rows, int cols, bool trainable) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Tensor(rows, cols);
  p->grad = Tensor(rows, cols);
  p->trainable = trainable;
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

std::int64_t ParamSet::count(const std::string& prefix) const {
  std::int64_t n = 0;
  for (const auto& p : params_) {
    if (p->trainable && p->name.compare(0, prefix.size(), prefix) == 0) {
      n += static_cast<std::int64_t>(p->value.size());
    }
  }
  return n;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

std::map<std::string, Tensor> ParamSet::snapshot() const {
  std::map<std::string, Tensor> out;
  for (const auto& p : params_) out.emplace(p->name, p->value);
  return out;
}

void ParamSet::restore(const std::map<std::string, Tensor>& values) {
  for (auto& p : params_) {
    auto it = values.find(p->name);
    if (it == values.end()) throw ConfigError("restore: missing parameter '" + p->name + "'");
    if (!it->second.same_shape(p->value)) {
      throw ShapeError("restore: parameter '" + p->name + "' has shape " +
                       it->second.shape_str() + ", expected " + p->value.shape_str());
    }
    p->value = it->second;
  }
  if (values.size() != params_.size()) {
    for (const auto& [name, _] : values) {
      if (!index_.count(name)) throw ConfigError("restore: unexpected parameter '" + name + "'");
    }
  }
}

void init_uniform(Parameter& p, int fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value.span()) v = dist(rng);
}

}  // namespace dignn
