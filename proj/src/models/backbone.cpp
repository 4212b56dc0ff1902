// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/backbone.hpp"

#include <map>

#include "dignn/errors.hpp"
#include "dignn/mpnn.hpp"
#include "dignn/schnet.hpp"

namespace dignn {

std::vector<RelationEdges> relation_edges(const TypedGraph& g) {
  std::vector<RelationEdges> out(static_cast<std::size_t>(g.num_relations()));
  for (int r = 0; r < g.num_relations(); ++r) {
    RelationEdges& re = out[static_cast<std::size_t>(r)];
    std::map<int, int> slot;
    for (int e : g.by_relation[static_cast<std::size_t>(r)]) {
      const int u = g.undirected[static_cast<std::size_t>(e)];
      auto [it, fresh] = slot.try_emplace(u, static_cast<int>(re.undirected.size()));
      if (fresh) re.undirected.push_back(u);
      re.directed.push_back(e);
      re.position.push_back(it->second);
      re.src.push_back(g.src[static_cast<std::size_t>(e)]);
      re.dst.push_back(g.dst[static_cast<std::size_t>(e)]);
    }
  }
  return out;
}

void check_graph(const TypedGraph& g, const ModelConfig& config) {
  if (g.relations != config.relations) {
    throw DataError("graph relation catalogue does not match the model's");
  }
  if (g.elements != config.elements) {
    throw DataError("graph element catalogue does not match the model's");
  }
  for (const auto& e : g.edges) {
    if (e.relation < 0 || e.relation >= g.num_relations()) {
      throw DataError("relation label " + std::to_string(e.relation) + " outside the catalogue");
    }
  }
  if (static_cast<int>(g.by_relation.size()) != g.num_relations() ||
      g.num_directed() != 2 * static_cast<int>(g.edges.size())) {
    throw DataError("graph directed views are stale; call finalize()");
  }
}

std::unique_ptr<Backbone> make_backbone(const ModelConfig& config, ParamSet& params,
                                        std::mt19937_64& rng) {
  if (config.backbone == BackboneKind::kMpnn) return std::make_unique<Mpnn>(config, params, rng);
  return std::make_unique<Schnet>(config, params, rng);
}

std::int64_t count_of(const std::vector<Parameter*>& ps) {
  std::int64_t n = 0;
  for (const Parameter* p : ps) {
    if (p->trainable) n += static_cast<std::int64_t>(p->value.rows()) * p->value.cols();
  }
  return n;
}

}  // namespace dignn
