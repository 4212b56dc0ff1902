// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "dignn/dataset.hpp"
#include "dignn/errors.hpp"
#include "dignn/harness.hpp"
#include "dignn/json_util.hpp"

namespace dignn {

using nlohmann::json;

void run_parallel(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  workers = std::clamp(workers, 1, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::mutex mu;
    int next = 0;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          int i;
          {
            std::lock_guard lock(mu);
            if (next >= count) return;
            i = next++;
          }
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void TrainConfig::validate() const {
  model.validate();
  loss.validate();
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
  if (!(min_delta >= 0.0)) throw ConfigError("min_delta must be >= 0");
  std::set<AuxTask> a(model.aux_tasks.begin(), model.aux_tasks.end());
  std::set<AuxTask> b(loss.tasks.begin(), loss.tasks.end());
  if (a != b) throw ConfigError("model aux heads and loss tasks differ");
}

json TrainConfig::to_json() const {
  return {{"model", model.to_json()},
          {"loss", loss.to_json()},
          {"optimizer",
           {{"rule", to_string(optimizer.rule)},
            {"learning_rate", optimizer.learning_rate},
            {"beta1", optimizer.beta1},
            {"beta2", optimizer.beta2},
            {"epsilon", optimizer.epsilon}}},
          {"lr_decay", lr_decay},
          {"batch_size", batch_size},
          {"patience", patience},
          {"max_epochs", max_epochs},
          {"min_delta", min_delta},
          {"seed", seed},
          {"normalise", normalise}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  require_known_keys(j,
                     {"model", "loss", "optimizer", "lr_decay", "batch_size", "patience",
                      "max_epochs", "min_delta", "seed", "normalise"},
                     "train");
  TrainConfig c;
  if (!j.contains("model")) throw UsageError("train: missing 'model'");
  c.model = ModelConfig::from_json(j.at("model"));
  if (j.contains("loss")) c.loss = LossConfig::from_json(j.at("loss"));
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    require_known_keys(o, {"rule", "learning_rate", "beta1", "beta2", "epsilon"}, "optimizer");
    c.optimizer.rule = parse_optimizer_rule(get_or<std::string>(o, "rule", "adam"));
    c.optimizer.learning_rate = get_or(o, "learning_rate", c.optimizer.learning_rate);
    c.optimizer.beta1 = get_or(o, "beta1", c.optimizer.beta1);
    c.optimizer.beta2 = get_or(o, "beta2", c.optimizer.beta2);
    c.optimizer.epsilon = get_or(o, "epsilon", c.optimizer.epsilon);
  }
  c.lr_decay = get_or(j, "lr_decay", c.lr_decay);
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.patience = get_or(j, "patience", c.patience);
  c.max_epochs = get_or(j, "max_epochs", c.max_epochs);
  c.min_delta = get_or(j, "min_delta", c.min_delta);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.normalise = get_or(j, "normalise", c.normalise);
  c.validate();
  return c;
}

namespace {

struct Sample {
  TypedGraph graph;
  double energy = 0.0;
  AuxTargets targets;
};

std::vector<Sample> prepare(const EnergyModel& model, const std::vector<ChemicalSystem>& set,
                            const BondRuleSet& rules, const LossConfig& loss,
                            const std::vector<double>& grid) {
  std::vector<Sample> out;
  out.reserve(set.size());
  for (const auto& s : set) {
    if (!s.energy) {
      throw DataError("system " + s.provenance.geometry_id + " has no energy label");
    }
    out.push_back({model.graph(s, rules), *s.energy,
                   aux_targets(s, model.config().elements, loss, grid)});
  }
  return out;
}

double rms(const std::vector<Sample>& samples, std::vector<double> AuxTargets::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    for (double v : s.targets.*field) {
      sum += v * v;
      ++n;
    }
  }
  const double r = n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
  return r > 1e-12 ? r : 1.0;
}

std::string describe(const LossTerms& t) {
  std::ostringstream os;
  os << "total=" << t.total.item() << " energy=" << t.energy << " atoms=" << t.atoms
     << " orbitals=" << t.orbitals << " dsg=" << t.dsg;
  return os.str();
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<ChemicalSystem>& train_set,
                  const std::vector<ChemicalSystem>& val_set, const BondRuleSet& rules,
                  const std::vector<double>& grid) {
  config.validate();
  if (train_set.empty()) throw ConfigError("empty training set");
  ModelConfig mc = config.model;
  mc.init_seed = derive_seed(config.seed, 1);
  if (mc.has_task(AuxTask::kScalingDistribution) &&
      mc.scaling_bins != static_cast<int>(grid.size())) {
    throw ConfigError("scaling head has " + std::to_string(mc.scaling_bins) +
                      " bins but the grid has " + std::to_string(grid.size()) + " points");
  }
  EnergyModel model(mc);
  LossConfig loss = config.loss;

  auto train_samples = prepare(model, train_set, rules, loss, grid);
  auto val_samples = prepare(model, val_set, rules, loss, grid);

  if (config.normalise) {
    std::vector<double> per_atom;
    for (const auto& s : train_samples) {
      per_atom.push_back(s.energy / std::max(1, s.graph.num_nodes));
    }
    const Aggregate a = aggregate(per_atom);
    model.set_energy_normalisation(a.std > 1e-12 ? a.std : 1.0, a.mean);
    loss.atoms_scale = rms(train_samples, &AuxTargets::atoms);
    loss.orbitals_scale = rms(train_samples, &AuxTargets::orbitals);
    loss.scaling_scale = rms(train_samples, &AuxTargets::scaling);
  }

  Optimizer opt(config.optimizer);
  std::mt19937_64 rng(derive_seed(config.seed, 2));
  std::vector<int> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  TrainResult result{std::move(model), loss, {}, 0, 0.0};
  EnergyModel& m = result.model;
  auto best = m.params().snapshot();
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  m.params().zero_grad();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = train_samples[order[k]];
        Tape tape;
        auto out = m.forward(s.graph, tape);
        auto terms = total_loss(out.prediction.energy, s.energy, out.aux, &s.targets, loss);
        if (!std::isfinite(terms.total.item())) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch) + ": " + describe(terms));
        }
        tape.backward(terms.total, weight);
        log.loss_total += terms.total.item();
        log.loss_energy += terms.energy;
        log.loss_atoms += terms.atoms;
        log.loss_orbitals += terms.orbitals;
        log.loss_dsg += terms.dsg;
      }
      try {
        opt.step(m.params());
      } catch (const TrainingError& e) {
        throw TrainingError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                            ": " + e.what());
      }
    }
    const double n = static_cast<double>(train_samples.size());
    log.loss_total /= n;
    log.loss_energy /= n;
    log.loss_atoms /= n;
    log.loss_orbitals /= n;
    log.loss_dsg /= n;

    if (val_samples.empty()) {
      log.val_loss = log.loss_total;
    } else {
      double v = 0.0;
      for (const auto& s : val_samples) {
        Tape tape = Tape::inference();
        auto out = m.forward(s.graph, tape);
        v += total_loss(out.prediction.energy, s.energy, out.aux, &s.targets, loss).total.item();
      }
      log.val_loss = v / static_cast<double>(val_samples.size());
    }
    if (!std::isfinite(log.val_loss)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.log.push_back(log);

    if (log.val_loss < best_val - config.min_delta) {
      best_val = log.val_loss;
      best = m.params().snapshot();
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
    if (config.lr_decay < 1.0) {
      opt.set_learning_rate(opt.config().learning_rate * config.lr_decay);
    }
  }
  m.params().restore(best);
  result.best_val = best_val;
  return result;
}

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss_total,loss_energy,loss_atoms,loss_orbitals,loss_dsg,val_loss\n";
  for (const auto& e : log) {
    os << e.epoch << ',' << e.loss_total << ',' << e.loss_energy << ',' << e.loss_atoms << ','
       << e.loss_orbitals << ',' << e.loss_dsg << ',' << e.val_loss << '\n';
  }
  write_text(path, os.str());
}

}  // namespace dignn
