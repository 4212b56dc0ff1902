// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <doctest.h>

#include <cmath>

#include "dignn/errors.hpp"
#include "dignn/mpnn.hpp"
#include "helpers.hpp"

using namespace dignn;
using namespace dignn::testing;

namespace {

const Mpnn& as_mpnn(const EnergyModel& m) { return dynamic_cast<const Mpnn&>(m.backbone()); }

double ssp(double x) { return std::log1p(std::exp(x)) - std::log(2.0); }

ModelConfig mol_config(Specialisation s) {
  const auto rules = BondRuleSet::molecules();
  return tiny_mpnn(s, rules.elements(), rules.relations());
}

// Four atoms: an H-C-O chain plus an N that only sees the rest in
// fully-connected mode.
ChemicalSystem hcon() {
  return make_system({"H", "C", "O", "N"},
                     {{{-1.0, 0.35, 0.0}}, {{0.0, 0.0, 0.0}}, {{1.2, 0.1, 0.0}}, {{0.3, 2.1, 0.4}}});
}

}  // namespace

TEST_CASE("mpnn messages match a per-edge scalar oracle on a path graph") {
  const auto rules = BondRuleSet::molecules();
  EnergyModel model(mol_config(Specialisation::kNone));
  randomize(model.params(), 3);
  const Mpnn& net = as_mpnn(model);
  const auto g = model.graph(hco(), rules);
  REQUIRE(g.edges.size() == 2);

  Tape tape;
  auto ctx = net.prepare(g, tape);
  Var h0 = net.initial_state(ctx);
  auto msgs = net.messages(ctx, h0);

  const auto& cfg = model.config();
  const int d = cfg.state_size;
  const auto& ps = model.params();
  const Tensor& w1 = ps.at("message.base.in.W").value;
  const Tensor& b1 = ps.at("message.base.in.b").value;
  const Tensor& w2 = ps.at("message.base.out.W").value;
  const Tensor& b2 = ps.at("message.base.out.b").value;
  const double step = (cfg.rbf.stop - cfg.rbf.start) / (cfg.rbf.count - 1);

  std::vector<std::vector<double>> expect(3, std::vector<double>(static_cast<std::size_t>(d), 0.0));
  const auto sys = hco();
  for (int v = 0; v < 3; ++v) {
    for (int w = 0; w < 3; ++w) {
      if (v == w) continue;
      const double dist = distance(sys.coords[v], sys.coords[w]);
      if ((v == 0 && w == 2) || (v == 2 && w == 0)) continue;  // H..O is not bonded
      std::vector<double> f(static_cast<std::size_t>(cfg.rbf.count));
      for (int k = 0; k < cfg.rbf.count; ++k) {
        const double mu = cfg.rbf.start + k * step;
        f[k] = std::exp(-cfg.rbf.gamma * (dist - mu) * (dist - mu));
      }
      std::vector<double> hidden(static_cast<std::size_t>(cfg.edge_hidden));
      for (int j = 0; j < cfg.edge_hidden; ++j) {
        double s = b1(0, j);
        for (int k = 0; k < cfg.rbf.count; ++k) s += w1(j, k) * f[k];
        hidden[j] = ssp(s);
      }
      const int elem_w = rules.element_index(sys.elements[w]);
      for (int i = 0; i < d; ++i) {
        // h_w is one-hot, so A h_w picks column elem_w of A.
        const int flat = i * d + elem_w;
        double a = b2(0, flat);
        for (int j = 0; j < cfg.edge_hidden; ++j) a += w2(flat, j) * hidden[j];
        expect[v][i] += a;
      }
    }
  }
  const Tensor& got = msgs.total.value();
  for (int v = 0; v < 3; ++v) {
    for (int i = 0; i < d; ++i) CHECK(got(v, i) == doctest::Approx(expect[v][i]).epsilon(1e-12));
  }
}

TEST_CASE("mpnn isolated node receives a zero message") {
  const auto rules = BondRuleSet::molecules();
  EnergyModel model(mol_config(Specialisation::kMessage));
  randomize(model.params(), 4);
  const auto g = model.graph(hcon(), rules);
  Tape tape;
  const Mpnn& net = as_mpnn(model);
  auto ctx = net.prepare(g, tape);
  auto msgs = net.messages(ctx, net.initial_state(ctx));
  for (int i = 0; i < model.config().state_size; ++i) CHECK(msgs.total.value()(3, i) == 0.0);
}

TEST_CASE("mpnn initial state is the padded one-hot element vector") {
  const auto rules = BondRuleSet::molecules();
  EnergyModel model(mol_config(Specialisation::kNone));
  const auto g = model.graph(hcon(), rules);
  Tape tape;
  const Mpnn& net = as_mpnn(model);
  auto ctx = net.prepare(g, tape);
  const Tensor& h0 = net.initial_state(ctx).value();
  CHECK(h0.cols() == model.config().state_size);
  CHECK(h0(0, 0) == 1.0);
  CHECK(h0(1, 1) == 1.0);
  CHECK(h0(2, 3) == 1.0);
  CHECK(h0(3, 2) == 1.0);
  CHECK(h0.sum() == 4.0);
}

TEST_CASE("mpnn readout equals a hand-computed perceptron sum") {
  const auto rules = BondRuleSet::molecules();
  EnergyModel model(mol_config(Specialisation::kNone));
  randomize(model.params(), 5);
  model.set_energy_normalisation(2.0, 0.5);
  const Mpnn& net = as_mpnn(model);
  const auto g = model.graph(make_system({"H", "H"}, {{{0, 0, 0}}, {{0.74, 0, 0}}}), rules);

  Tape tape;
  auto ctx = net.prepare(g, tape);
  std::vector<Var> states{net.initial_state(ctx)};
  for (int t = 0; t < model.config().depth; ++t) {
    states.push_back(net.update(ctx, states.back(), net.messages(ctx, states.back())));
  }
  auto pred = net.readout(ctx, states);

  const auto& ps = model.params();
  const Tensor& w1 = ps.at("readout.hidden.W").value;
  const Tensor& b1 = ps.at("readout.hidden.b").value;
  const Tensor& w2 = ps.at("readout.out.W").value;
  const Tensor& b2 = ps.at("readout.out.b").value;
  const int d = model.config().state_size;
  double total = 0.0;
  for (int v = 0; v < 2; ++v) {
    std::vector<double> x;
    for (const auto& s : states) {
      for (int i = 0; i < d; ++i) x.push_back(s.value()(v, i));
    }
    double out = b2(0, 0);
    for (int j = 0; j < w1.rows(); ++j) {
      double a = b1(0, j);
      for (std::size_t k = 0; k < x.size(); ++k) a += w1(j, static_cast<int>(k)) * x[k];
      out += w2(0, j) * ssp(a);
    }
    const double e = 2.0 * out + 0.5;
    CHECK(pred.contributions.value()(v, 0) == doctest::Approx(e).epsilon(1e-12));
    total += e;
  }
  CHECK(pred.energy.item() == doctest::Approx(total).epsilon(1e-12));
  CHECK(pred.pooled.cols() == model.config().readout_hidden);
}

TEST_CASE("mpnn forward with the generic path fully weighted reduces to the base model") {
  const auto rules = BondRuleSet::molecules();
  for (auto conn : {Connectivity::kBondedOnly, Connectivity::kFullyConnected}) {
    ModelConfig base_cfg = mol_config(Specialisation::kNone);
    base_cfg.connectivity = conn;
    EnergyModel base(base_cfg);
    randomize(base.params(), 21);
    const auto g = base.graph(hcon(), rules);
    const double e_base = base.predict(g);
    for (auto s : all_specialisations()) {
      CAPTURE(to_string(s));
      ModelConfig cfg = base_cfg;
      cfg.specialisation = s;
      EnergyModel m(cfg);
      randomize(m.params(), 22);
      copy_shared(base.params(), m.params());
      m.params().at("alpha.logit").value.fill(50.0);
      CHECK(m.backbone().reported_alpha() == 1.0);
      CHECK(std::abs(m.predict(g) - e_base) <= 1e-12);
    }
  }
}

TEST_CASE("mpnn relation weights of one reproduce the base model for any blend") {
  const auto rules = BondRuleSet::molecules();
  ModelConfig base_cfg = mol_config(Specialisation::kNone);
  base_cfg.connectivity = Connectivity::kFullyConnected;
  EnergyModel base(base_cfg);
  randomize(base.params(), 31);
  const auto g = base.graph(hcon(), rules);
  for (auto s : {Specialisation::kWeightScalar, Specialisation::kWeightVector}) {
    for (double logit : {-2.0, 0.0, 0.7}) {
      ModelConfig cfg = base_cfg;
      cfg.specialisation = s;
      EnergyModel m(cfg);
      copy_shared(base.params(), m.params());
      m.params().at("alpha.logit").value.fill(logit);
      CHECK(m.predict(g) == doctest::Approx(base.predict(g)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mpnn shared-block cell equals the concatenated cell with stacked copies") {
  const auto rules = BondRuleSet::molecules();
  ModelConfig c3 = mol_config(Specialisation::kUpdateShared);
  c3.connectivity = Connectivity::kFullyConnected;
  EnergyModel m3(c3);
  randomize(m3.params(), 41);
  ModelConfig c2 = c3;
  c2.specialisation = Specialisation::kUpdateConcat;
  EnergyModel m2(c2);
  copy_shared(m3.params(), m2.params());

  Tape tape;
  const GruVars wide = as_mpnn(m3).materialize_shared(tape);
  const auto& blocks = as_mpnn(m3).shared_blocks();
  const int d = c3.state_size;
  const int nr = static_cast<int>(c3.relations.size());
  // The materialised matrices are [U | Q | ... | Q] exactly.
  for (auto [w, u, q] : {std::tuple{wide.wz, blocks.uz, blocks.qz},
                         std::tuple{wide.wr, blocks.ur, blocks.qr},
                         std::tuple{wide.wh, blocks.uh, blocks.qh}}) {
    REQUIRE(w.cols() == d * (nr + 1));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        CHECK(w.value()(i, j) == u->value(i, j));
        for (int r = 0; r < nr; ++r) CHECK(w.value()(i, d + r * d + j) == q->value(i, j));
      }
    }
  }
  auto& wide2 = as_mpnn(m2).wide_cell();
  wide2.wz->value = wide.wz.value();
  wide2.wr->value = wide.wr.value();
  wide2.wh->value = wide.wh.value();
  wide2.bz->value = blocks.bz->value;
  wide2.br->value = blocks.br->value;
  wide2.bh->value = blocks.bh->value;

  const auto g = m3.graph(hcon(), rules);
  CHECK(std::abs(m3.predict(g) - m2.predict(g)) <= 1e-12);
}

TEST_CASE("mpnn energy is invariant under node relabelling") {
  const auto rules = BondRuleSet::molecules();
  const auto sys = hcon();
  auto perm = sys;
  const std::vector<int> order{2, 0, 3, 1};
  for (std::size_t i = 0; i < order.size(); ++i) {
    perm.elements[i] = sys.elements[order[i]];
    perm.coords[i] = sys.coords[order[i]];
  }
  for (auto s : all_specialisations()) {
    CAPTURE(to_string(s));
    ModelConfig cfg = mol_config(s);
    cfg.connectivity = Connectivity::kFullyConnected;
    EnergyModel m(cfg);
    randomize(m.params(), 51);
    CHECK(std::abs(m.predict(m.graph(sys, rules)) - m.predict(m.graph(perm, rules))) <= 1e-10);
  }
}

TEST_CASE("mpnn duplicating a separated non-interacting fragment doubles its energy") {
  const auto rules = BondRuleSet::molecules();
  EnergyModel m(mol_config(Specialisation::kUpdateSeparate));
  randomize(m.params(), 61);
  const auto one = hco();
  auto two = one;
  for (std::size_t i = 0; i < one.size(); ++i) {
    two.elements.push_back(one.elements[i]);
    auto c = one.coords[i];
    c[0] += 40.0;
    two.coords.push_back(c);
  }
  CHECK(m.predict(m.graph(two, rules)) ==
        doctest::Approx(2.0 * m.predict(m.graph(one, rules))).epsilon(1e-12));
}

TEST_CASE("mpnn contributions sum to the energy") {
  const auto rules = BondRuleSet::molecules();
  EnergyModel m(mol_config(Specialisation::kMessage));
  randomize(m.params(), 71);
  const auto g = m.graph(hcon(), rules);
  const auto c = m.contributions(g);
  double s = 0.0;
  for (double v : c) s += v;
  CHECK(s == doctest::Approx(m.predict(g)).epsilon(1e-12));
}

TEST_CASE("mpnn analytic gradients match central differences for every parameter") {
  const auto rules = BondRuleSet::molecules();
  for (auto s : std::vector<Specialisation>{Specialisation::kNone, Specialisation::kMessage,
                                            Specialisation::kWeightScalar,
                                            Specialisation::kWeightVector,
                                            Specialisation::kUpdateSeparate,
                                            Specialisation::kUpdateConcat,
                                            Specialisation::kUpdateShared}) {
    for (bool btf : {false, true}) {
      CAPTURE(to_string(s));
      CAPTURE(btf);
      ModelConfig cfg = mol_config(s);
      cfg.bond_type_feature = btf;
      cfg.connectivity = btf ? Connectivity::kFullyConnected : Connectivity::kBondedOnly;
      EnergyModel m(cfg);
      randomize(m.params(), 81);
      const auto g = m.graph(hcon(), rules);
      auto report = check_gradients(m.params(), [&](Tape& t) {
        return m.forward(g, t).prediction.energy;
      });
      CAPTURE(report.worst);
      CHECK(report.checked == m.params().count());
      CHECK(report.max_rel < 1e-4);
    }
  }
  SUBCASE("two-atom system") {
    EnergyModel m(mol_config(Specialisation::kUpdateConcat));
    randomize(m.params(), 82);
    const auto g = m.graph(make_system({"C", "O"}, {{{0, 0, 0}}, {{1.2, 0, 0}}}), rules);
    auto report =
        check_gradients(m.params(), [&](Tape& t) { return m.forward(g, t).prediction.energy; });
    CAPTURE(report.worst);
    CHECK(report.max_rel < 1e-4);
  }
}

TEST_CASE("mpnn parameter counts") {
  SUBCASE("relation weights add one scalar or one state vector per relation") {
    const std::vector<std::string> rel{"a", "b", "c", kNoBond};
    ModelConfig cfg = ModelConfig::mpnn({"H", "C"}, rel);
    cfg.specialisation = Specialisation::kWeightScalar;
    EnergyModel scalar(cfg);
    CHECK(scalar.count_params().specialisation == 4);
    cfg.specialisation = Specialisation::kWeightVector;
    EnergyModel vec(cfg);
    CHECK(vec.count_params().specialisation == 292);
    CHECK(vec.count_params().mixing == 1);
  }
  SUBCASE("added counts are ordered message > separate > concat > shared > vector > scalar") {
    const auto rules = BondRuleSet::molecules();
    std::vector<std::int64_t> added;
    for (auto s : {Specialisation::kMessage, Specialisation::kUpdateSeparate,
                   Specialisation::kUpdateConcat, Specialisation::kUpdateShared,
                   Specialisation::kWeightVector, Specialisation::kWeightScalar}) {
      ModelConfig cfg = ModelConfig::mpnn(rules.elements(), rules.relations());
      cfg.specialisation = s;
      added.push_back(EnergyModel(cfg).count_params().specialisation);
    }
    for (std::size_t i = 1; i < added.size(); ++i) CHECK(added[i - 1] > added[i]);
  }
  SUBCASE("recurrent variants scale as R : 1 + (R - 1) / 2 : 1 in cell-sized blocks") {
    const auto rules = BondRuleSet::molecules();
    ModelConfig cfg = ModelConfig::mpnn(rules.elements(), rules.relations());
    const std::int64_t d = cfg.state_size;
    const std::int64_t r = static_cast<std::int64_t>(cfg.relations.size());
    const std::int64_t cell = 3 * (d * 2 * d + d);
    cfg.specialisation = Specialisation::kUpdateSeparate;
    CHECK(EnergyModel(cfg).count_params().specialisation == r * cell);
    cfg.specialisation = Specialisation::kUpdateConcat;
    CHECK(EnergyModel(cfg).count_params().specialisation == 3 * (d * (d + r * d) + d));
    cfg.specialisation = Specialisation::kUpdateShared;
    CHECK(EnergyModel(cfg).count_params().specialisation == cell);
  }
}

TEST_CASE("mpnn rejects graphs built for another catalogue") {
  EnergyModel m(mol_config(Specialisation::kNone));
  const auto crystal = BondRuleSet::crystals();
  const auto g = build_graph(make_system({"Al", "Al"}, {{{0, 0, 0}}, {{2.8, 0, 0}}}), crystal,
                             Connectivity::kBondedOnly);
  CHECK_THROWS_AS(m.predict(g), DataError);
}
