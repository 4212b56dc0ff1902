// Copyright 2026 The dignn Authors. Apache 2.0 License.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "dignn/graph.hpp"
#include "dignn/model_config.hpp"
#include "dignn/params.hpp"
#include "dignn/tape.hpp"

namespace dignn {

// energy is 1 x 1, contributions num_nodes x 1 (they sum to energy),
// pooled 1 x pooled_size (node-summed readout features).
struct Prediction {
  Var energy;
  Var contributions;
  Var pooled;
};

struct ParamCounts {
  std::int64_t base = 0;            // the unspecialised backbone
  std::int64_t specialisation = 0;  // relation-specific kernels and weights
  std::int64_t mixing = 0;          // blend logits, reported separately
  std::int64_t aux = 0;             // auxiliary heads

  // Added parameters as a percentage of the base model.
  double specialisation_percent() const {
    return base ? 100.0 * static_cast<double>(specialisation) / static_cast<double>(base) : 0.0;
  }
  double aux_percent() const {
    return base ? 100.0 * static_cast<double>(aux) / static_cast<double>(base) : 0.0;
  }
};

// Directed-edge index lists restricted to one relation.
struct RelationEdges {
  std::vector<int> undirected;  // distinct undirected edges of this relation
  std::vector<int> directed;    // directed edge ids
  std::vector<int> position;    // per directed edge, its index into `undirected`
  std::vector<int> src;
  std::vector<int> dst;
};
std::vector<RelationEdges> relation_edges(const TypedGraph& g);

class Backbone {
 public:
  virtual ~Backbone() = default;
  virtual Prediction forward(const TypedGraph& g, Tape& tape) const = 0;
  // Mean blend weight of the generic path in (0, 1]; 1 without specialisation.
  virtual double reported_alpha() const = 0;
  virtual ParamCounts count_params() const = 0;
  virtual int pooled_size() const = 0;
  virtual const ModelConfig& config() const = 0;
};

// Throws DataError when the graph's catalogues differ from the model's.
void check_graph(const TypedGraph& g, const ModelConfig& config);

std::unique_ptr<Backbone> make_backbone(const ModelConfig& config, ParamSet& params,
                                        std::mt19937_64& rng);

std::int64_t count_of(const std::vector<Parameter*>& ps);

}  // namespace dignn
