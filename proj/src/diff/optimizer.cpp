// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/optimizer.hpp"

#include <cmath>

#include "dignn/errors.hpp"

namespace dignn {

std::string to_string(OptimizerConfig::Rule rule) {
  return rule == OptimizerConfig::Rule::kSgd ? "sgd" : "adam";
}

OptimizerConfig::Rule parse_optimizer_rule(const std::string& s) {
  if (s == "sgd") return OptimizerConfig::Rule::kSgd;
  if (s == "adam") return OptimizerConfig::Rule::kAdam;
  throw ConfigError("unknown optimizer rule '" + s + "'");
}

void Optimizer::step(ParamSet& params) {
  for (const auto& p : params) {
    if (!p->trainable) continue;
    for (double g : p->grad.span()) {
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in parameter '" + p->name + "'");
    }
  }
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.rule == OptimizerConfig::Rule::kSgd) {
    for (auto& p : params) {
      if (p->trainable) p->value.add_scaled(p->grad, -lr);
    }
  } else {
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (auto& p : params) {
      if (!p->trainable) continue;
      if (p->m.empty()) {
        p->m = Tensor(p->value.rows(), p->value.cols());
        p->v = Tensor(p->value.rows(), p->value.cols());
      }
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        const double g = p->grad[i];
        p->m[i] = b1 * p->m[i] + (1.0 - b1) * g;
        p->v[i] = b2 * p->v[i] + (1.0 - b2) * g * g;
        const double mhat = p->m[i] / c1;
        const double vhat = p->v[i] / c2;
        p->value[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
      }
    }
  }
  params.zero_grad();
}

}  // namespace dignn
