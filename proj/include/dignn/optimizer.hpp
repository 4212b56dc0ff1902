// Copyright 2026 The dignn Authors. Apache 2.0 License.

#pragma once

#include <string>

#include "dignn/params.hpp"

namespace dignn {

struct OptimizerConfig {
  enum class Rule { kSgd, kAdam };
  Rule rule = Rule::kAdam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

std::string to_string(OptimizerConfig::Rule rule);
OptimizerConfig::Rule parse_optimizer_rule(const std::string& s);

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  // Applies one update from the accumulated gradients, then zeroes them.
  // Throws TrainingError naming the parameter if any gradient is non-finite;
  // in that case no parameter is modified.
  void step(ParamSet& params);
  long steps() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  OptimizerConfig config_;
  long steps_ = 0;
};

}  // namespace dignn
