#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "support.hpp"
#include "ucm/diagnosis.hpp"

using namespace ucm;

namespace {

struct Case {
  ScenarioDocument doc;
  SystemModel model;
  Script reference;

  explicit Case(ScenarioDocument d)
      : doc(std::move(d)), model(scenario_model(doc)), reference(test::interventions_only(doc)) {}

  Trace run(std::uint64_t seed, const std::vector<std::string>& faults = {}) const {
    return simulate(model, seed, scenario_script(doc, faults), doc.horizon);
  }

  DiagnosisProblem problem(std::vector<Deviation> devs, std::set<SensorId> observed = {},
                           std::size_t max_card = 2) const {
    if (observed.empty()) {
      for (const auto& s : model.sensors()) observed.insert(s.id);
    }
    return {model, reference, doc.horizon, std::move(devs), std::move(observed), max_card};
  }
};

std::set<std::set<SubsystemId>> component_sets(const std::vector<FaultHypothesis>& hs) {
  std::set<std::set<SubsystemId>> out;
  for (const auto& h : hs) out.insert(h.components);
  return out;
}

std::vector<std::set<SubsystemId>> rank_one(const std::vector<FaultHypothesis>& hs) {
  std::vector<std::set<SubsystemId>> out;
  for (const auto& h : hs) {
    if (h.cardinality == hs.front().cardinality) out.push_back(h.components);
  }
  return out;
}

}  // namespace

TEST_CASE("lid fault with full observability points at the lid") {
  const Case k(knife_fixture());
  const auto devs = expected_state_check(k.model, k.run(3, {"lid_stuck"}), k.run(0), k.doc.detection);
  const auto hs = diagnose(k.problem(devs));
  REQUIRE_FALSE(hs.empty());
  CHECK(hs.front().components == std::set<SubsystemId>{"lid_actuator"});
  CHECK(hs.front().cardinality == 1);
  CHECK(hs.front().consistent);
  CHECK(hs.front().explained == std::set<SensorId>{"knife_hardness", "knife_temp", "lid_state", "oven_temp"});
}

TEST_CASE("lid fault without the oven thermometer still ranks the lid first tier") {
  const Case k(knife_fixture());
  const auto devs = expected_state_check(k.model, k.run(3, {"lid_stuck"}), k.run(0), k.doc.detection);
  std::set<SensorId> observed;
  for (const auto& s : k.model.sensors()) {
    if (s.id != "oven_temp") observed.insert(s.id);
  }
  const auto hs = diagnose(k.problem(devs, observed));
  const auto top = rank_one(hs);
  CHECK(std::find(top.begin(), top.end(), std::set<SubsystemId>{"lid_actuator"}) != top.end());

  // Only the hardness tester observed: backtracking crosses unobserved sensors.
  const auto sparse = diagnose(k.problem(devs, {"burner_set", "lid_cmd", "quench_cmd", "knife_hardness"}));
  const auto sparse_top = rank_one(sparse);
  CHECK(std::find(sparse_top.begin(), sparse_top.end(), std::set<SubsystemId>{"lid_actuator"}) != sparse_top.end());
  const auto graph = derive_causal_graph(k.model);
  const auto lid = std::find_if(sparse.begin(), sparse.end(), [](const auto& h) {
    return h.components == std::set<SubsystemId>{"lid_actuator"};
  });
  const auto paths = explain(k.model, *lid, graph);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].path.size() == 3);
  CHECK(paths[0].path[0].effect == "oven_temp");
}

TEST_CASE("an isolated anomalous sensor is blamed on the sensor") {
  const Case c(test::bundled("sensor_chain.yaml"));
  auto observed = c.run(2);
  const auto col = observed.column("b");
  for (auto& rec : observed.ticks) rec.values[col] = 5.0;
  const auto devs = expected_state_check(c.model, observed, c.run(0), c.doc.detection);
  REQUIRE_FALSE(devs.empty());
  CHECK(std::all_of(devs.begin(), devs.end(), [](const auto& d) { return d.sensor == "b" && !d.matched; }));
  const auto hs = diagnose(c.problem(devs));
  REQUIRE_FALSE(hs.empty());
  CHECK(hs.front().components == std::set<SubsystemId>{"sensor-fault:b"});
  CHECK(hs.size() == 1);
}

TEST_CASE("a broken link is blamed on a component") {
  const Case c(test::bundled("sensor_chain.yaml"));
  const auto devs = expected_state_check(c.model, c.run(2, {"link_ab_broken"}), c.run(0), c.doc.detection);
  const auto hs = diagnose(c.problem(devs));
  REQUIRE_FALSE(hs.empty());
  CHECK(hs.front().components == std::set<SubsystemId>{"link_ab"});
  for (const auto& h : hs) CHECK_FALSE(is_sensor_fault_component(*h.components.begin()));
}

TEST_CASE("diagnose input errors") {
  const Case k(knife_fixture());
  CHECK_THROWS_WITH_AS(diagnose(k.problem({})), "nothing to diagnose", DiagnosisError);
  const std::vector<Deviation> one = {{"oven_temp", 100, "Hot", "Ambient"}};
  CHECK_THROWS_AS(diagnose(k.problem(one, {}, 0)), DiagnosisError);
  CHECK_THROWS_AS(diagnose(k.problem(one, {"nope"})), DiagnosisError);
  CHECK_THROWS_AS(diagnose(k.problem({{"nope", 0, "A", std::nullopt}})), DiagnosisError);
  // Deviations on unobserved sensors carry no evidence.
  CHECK_THROWS_WITH_AS(diagnose(k.problem(one, {"lid_cmd"})), "nothing to diagnose", DiagnosisError);
}

TEST_CASE("hypotheses are minimal, ranked and self-consistent") {
  const Case k(knife_fixture());
  const auto devs = expected_state_check(k.model, k.run(3, {"lid_stuck"}), k.run(0), k.doc.detection);
  for (std::size_t card = 1; card <= 3; ++card) {
    const auto hs = diagnose(k.problem(devs, {}, card));
    for (std::size_t i = 0; i < hs.size(); ++i) {
      CHECK(hs[i].consistent);
      CHECK(hs[i].cardinality == hs[i].components.size());
      CHECK(hs[i].cardinality <= card);
      for (std::size_t j = 0; j < hs.size(); ++j) {
        if (i == j) continue;
        CHECK_FALSE((hs[j].components.size() < hs[i].components.size() &&
                     std::includes(hs[i].components.begin(), hs[i].components.end(),
                                   hs[j].components.begin(), hs[j].components.end())));
      }
      if (i > 0) {
        CHECK(std::tie(hs[i - 1].cardinality, hs[i - 1].components) <= std::tie(hs[i].cardinality, hs[i].components));
      }
    }
  }
}

TEST_CASE("enlarging the observed set keeps the injected fault") {
  const Case k(knife_fixture());
  const auto devs = expected_state_check(k.model, k.run(3, {"lid_stuck"}), k.run(0), k.doc.detection);
  std::vector<SensorId> ids;
  for (const auto& s : k.model.sensors()) ids.push_back(s.id);
  test::Gen gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::set<SensorId> small{"knife_hardness"};
    for (const auto& s : ids) {
      if (gen.coin()) small.insert(s);
    }
    std::set<SensorId> large = small;
    for (const auto& s : ids) {
      if (gen.coin()) large.insert(s);
    }
    const auto a = component_sets(diagnose(k.problem(devs, small)));
    const auto b = component_sets(diagnose(k.problem(devs, large)));
    CHECK(a.contains({"lid_actuator"}));
    CHECK(b.contains({"lid_actuator"}));
  }
}

TEST_CASE("explain returns shortest annotated paths") {
  const Case k(knife_fixture());
  const auto graph = derive_causal_graph(k.model);
  FaultHypothesis lid{{"lid_actuator"}, 1, true, {"lid_state", "knife_hardness"}};
  const auto paths = explain(k.model, lid, graph);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].deviating == "knife_hardness");
  const std::vector<CausalEdge> expected = {{"lid_state", "oven_temp", "oven_chamber", 2},
                                            {"oven_temp", "knife_temp", "knife", 3},
                                            {"knife_temp", "knife_hardness", "cooler", 1}};
  CHECK(paths[0].path == expected);
  CHECK(paths[1].deviating == "lid_state");
  CHECK(paths[1].path.empty());

  lid.consistent = false;
  CHECK_THROWS_AS(explain(k.model, lid, graph), DiagnosisError);

  const Case t(test::bundled("thermostat.yaml"));
  const FaultHypothesis ctrl{{"controller"}, 1, true, {"temp", "valve"}};
  const auto cyc = explain(t.model, ctrl, derive_causal_graph(t.model));
  REQUIRE(cyc.size() == 2);
  CHECK(cyc[0].path.empty());
  CHECK(cyc[1].path.size() == 1);
}

TEST_CASE("diagnose matches the exhaustive oracle on random faults") {
  test::Gen gen(606);
  for (const auto& name : test::bundled_names()) {
    const Case c(test::bundled(name));
    if (c.model.subsystems().size() > 5) continue;
    std::vector<SensorId> ids;
    for (const auto& s : c.model.sensors()) ids.push_back(s.id);
    const auto reference = c.run(0);
    for (int trial = 0; trial < 8; ++trial) {
      // Replace one component's rules with a random deterministic table.
      const auto& victim = gen.pick(c.model.subsystems());
      std::vector<Rule> rules;
      std::set<SystemState> used;
      for (std::size_t r = 0; r < 3; ++r) {
        SystemState g;
        for (const auto& s : victim.sensors) g[s] = gen.pick(c.model.sensor(s).states).label;
        if (!used.insert(g).second) continue;
        const auto& target = c.model.sensor(gen.pick(ids));
        rules.push_back({g, {{target.id, gen.pick(target.states).label, static_cast<Tick>(1 + gen.below(3))}}});
      }
      Script faulted = c.reference;
      faulted.faults.push_back({victim.id, rules, static_cast<Tick>(gen.below(static_cast<std::size_t>(c.doc.horizon)))});
      const auto observed_trace = simulate(c.model, 1, faulted, c.doc.horizon);
      std::set<SensorId> observed;
      for (const auto& s : ids) {
        if (gen.below(4) != 0) observed.insert(s);
      }
      std::set<SensorId> deviating;
      for (const auto& s : oracle::label_deviations(observed_trace, reference)) {
        if (observed.contains(s)) deviating.insert(s);
      }
      if (deviating.empty()) continue;
      const std::size_t max_card = c.model.subsystems().size();
      const oracle::DiagnosisOracle o{c.model, c.reference, c.doc.horizon, deviating, observed};
      const auto hs = diagnose(c.problem(oracle::as_deviations(deviating), observed, max_card));
      INFO(name << " victim " << victim.id);
      CHECK(component_sets(hs) == o.consistent(max_card));
    }
  }
}
