// Copyright 2026 The dignn Authors. Apache 2.0 License.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dignn/tensor.hpp"

namespace dignn {

// A named learnable array. Buffers (trainable == false) are saved in
// checkpoints but never touched by the optimizer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  // adaptive-moment state
  Tensor m;
  Tensor v;
};

// Ordered collection of parameters with stable addresses.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet&) = delete;
  ParamSet& operator=(const ParamSet&) = delete;
  ParamSet(ParamSet&&) = default;
  ParamSet& operator=(ParamSet&&) = default;

  Parameter& add(const std::string& name, int rows, int cols, bool trainable = true);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

  // Number of trainable scalars whose name starts with prefix ("" = all).
  std::int64_t count(const std::string& prefix = "") const;
  void zero_grad();

  // Snapshot / restore of values only (optimizer state excluded).
  std::map<std::string, Tensor> snapshot() const;
  void restore(const std::map<std::string, Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

// Uniform in +-(fan_in)^(-1/2) for weights; biases stay zero.
void init_uniform(Parameter& p, int fan_in, std::mt19937_64& rng);

}  // namespace dignn
