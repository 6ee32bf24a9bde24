#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "ucm/model.hpp"
#include "ucm/simulation.hpp"

using namespace ucm;
using test::binary_sensor;

namespace {

Subsystem sub(const std::string& id, std::vector<SensorId> sensors, std::vector<Rule> rules = {}) {
  return {id, SubsystemKind::Component, std::move(sensors), std::move(rules)};
}

Rule when(SystemState guard, std::vector<Effect> effects) { return {std::move(guard), std::move(effects)}; }

// Enumerates every joint state of `sensors` (labels Off/On) and reports
// whether some state satisfies two guards at once.
bool overlaps_exhaustively(const std::vector<SensorId>& sensors, const std::vector<Rule>& rules) {
  const std::size_t n = sensors.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    SystemState s;
    for (std::size_t i = 0; i < n; ++i) s[sensors[i]] = (mask >> i) & 1U ? "On" : "Off";
    std::size_t hits = 0;
    for (const auto& r : rules) {
      const bool match = std::all_of(r.guard.begin(), r.guard.end(),
                                     [&](const auto& g) { return s.at(g.first) == g.second; });
      hits += match ? 1 : 0;
    }
    if (hits > 1) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("build_model accepts a rule-less subsystem over a proper subset") {
  const auto m = build_model({binary_sensor("a"), binary_sensor("b")}, {sub("s", {"a"})});
  CHECK(m.sensors().size() == 2);
  CHECK(m.subsystems().front().id == "s");
  CHECK(m.initial_state() == SystemState{{"a", "Off"}, {"b", "Off"}});
}

TEST_CASE("a subsystem may not own every sensor") {
  CHECK_THROWS_AS(build_model({binary_sensor("a")}, {sub("s", {"a"})}), ModelError);
  CHECK_THROWS_AS(build_model({binary_sensor("a"), binary_sensor("b")}, {sub("s", {"a", "b"})}),
                  ModelError);
}

TEST_CASE("build_model rejects malformed inputs") {
  const auto a = binary_sensor("a");
  const auto b = binary_sensor("b");
  const auto c = binary_sensor("c");
  CHECK_THROWS_AS(build_model({a, a}, {}), ModelError);
  CHECK_THROWS_AS(build_model({a, b, c}, {sub("s", {"a"}), sub("s", {"b"})}), ModelError);
  CHECK_THROWS_AS(build_model({a, b}, {sub("s", {"zz"})}), ModelError);
  CHECK_THROWS_AS(build_model({a, b}, {sub("s", {})}), ModelError);
  CHECK_THROWS_AS(build_model({a, b}, {sub("s", {"a", "a"})}), ModelError);
  CHECK_THROWS_AS(build_model({Sensor{"x", {}, "Off"}, b}, {}), ModelError);
  CHECK_THROWS_AS(build_model({binary_sensor("x", "Nope"), b}, {}), ModelError);
  Sensor twin{"t", {{"A", Distribution::normal(0, 1)}, {"B", Distribution::normal(0, 1)}}, "A"};
  CHECK_THROWS_AS(build_model({twin, b}, {}), ModelError);
  Sensor dup_label{"t", {{"A", Distribution::normal(0, 1)}, {"A", Distribution::normal(5, 1)}}, "A"};
  CHECK_THROWS_AS(build_model({dup_label, b}, {}), ModelError);

  CHECK_THROWS_AS(build_model({a, b, c}, {sub("s", {"a"}, {when({{"b", "On"}}, {{"c", "On", 1}})})}),
                  ModelError);
  CHECK_THROWS_AS(build_model({a, b, c}, {sub("s", {"a"}, {when({{"a", "Hi"}}, {{"c", "On", 1}})})}),
                  ModelError);
  CHECK_THROWS_AS(build_model({a, b, c}, {sub("s", {"a"}, {when({{"a", "On"}}, {{"c", "Hi", 1}})})}),
                  ModelError);
  CHECK_THROWS_AS(build_model({a, b, c}, {sub("s", {"a"}, {when({{"a", "On"}}, {{"q", "On", 1}})})}),
                  ModelError);
}

TEST_CASE("priority lists must be permutations of the subsystem ids") {
  const std::vector<Sensor> s = {binary_sensor("a"), binary_sensor("b"), binary_sensor("c")};
  const std::vector<Subsystem> subs = {sub("p", {"a"}), sub("q", {"b"})};
  CHECK(build_model(s, subs).priority_order() == std::vector<SubsystemId>{"p", "q"});
  const auto swapped = build_model(s, subs, {"q", "p"});
  CHECK(swapped.priority_order() == std::vector<SubsystemId>{"q", "p"});
  CHECK(swapped.priority_rank("q") == 0);
  CHECK_THROWS_AS(build_model(s, subs, {"q"}), ModelError);
  CHECK_THROWS_AS(build_model(s, subs, {"q", "q"}), ModelError);
  CHECK_THROWS_AS(build_model(s, subs, {"q", "zz"}), ModelError);
}

TEST_CASE("delay 0 violates cause-precedes-effect") {
  CHECK_THROWS_WITH_AS(
      build_model({binary_sensor("a"), binary_sensor("b")},
                  {sub("s", {"a"}, {when({{"a", "On"}}, {{"b", "On", 0}})})}),
      doctest::Contains("effect must follow cause"), ModelError);
}

TEST_CASE("overlapping guards make a functional representation nondeterministic") {
  const std::vector<Sensor> s = {binary_sensor("lid"), binary_sensor("burner"), binary_sensor("oven")};
  const auto rules = std::vector<Rule>{when({{"lid", "Off"}}, {{"oven", "On", 1}}),
                                       when({{"lid", "Off"}, {"burner", "On"}}, {{"oven", "Off", 1}})};
  CHECK_THROWS_WITH_AS(build_model(s, {sub("oven", {"lid", "burner"}, rules)}),
                       doctest::Contains("nondeterministic functional representation"), ModelError);
  CHECK_THROWS_AS(build_model(s, {sub("o", {"lid"}, {when({}, {}), when({{"lid", "On"}}, {})})}),
                  ModelError);
}

TEST_CASE("pairwise overlap check agrees with exhaustive enumeration") {
  test::Gen gen(2024);
  const std::vector<SensorId> own = {"a", "b", "c"};
  const std::vector<Sensor> sensors = {binary_sensor("a"), binary_sensor("b"), binary_sensor("c"),
                                       binary_sensor("d")};
  std::size_t rejected = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Rule> rules(1 + gen.below(4));
    for (auto& r : rules) {
      for (const auto& s : own) {
        if (gen.below(3) != 0) r.guard[s] = gen.coin() ? "On" : "Off";
      }
      r.effects.push_back({"d", gen.coin() ? "On" : "Off", 1});
    }
    const bool expected_overlap = overlaps_exhaustively(own, rules);
    bool threw = false;
    try {
      build_model(sensors, {sub("s", own, rules)});
    } catch (const ModelError&) {
      threw = true;
    }
    CHECK(threw == expected_overlap);
    rejected += threw ? 1 : 0;
  }
  CHECK(rejected > 50);
  CHECK(rejected < 450);
}

TEST_CASE("derive_causal_graph reads edges off the rules") {
  const auto none = build_model({binary_sensor("a"), binary_sensor("b")}, {sub("s", {"a"})});
  CHECK(derive_causal_graph(none).edges.empty());

  const auto knife = scenario_model(knife_fixture());
  const auto g = derive_causal_graph(knife);
  CHECK(std::find(g.edges.begin(), g.edges.end(),
                  CausalEdge{"burner_set", "oven_temp", "oven_chamber", 2}) != g.edges.end());
  CHECK(std::is_sorted(g.edges.begin(), g.edges.end(), [](const auto& x, const auto& y) {
    return std::tie(x.cause, x.effect, x.via) < std::tie(y.cause, y.effect, y.via);
  }));
  CHECK(g == derive_causal_graph(scenario_model(knife_fixture())));
  for (const auto& e : g.edges) {
    CHECK(e.delay >= 1);
    CHECK(e.cause != e.effect);
  }
}

TEST_CASE("causal graph keeps the minimal delay per edge and drops self-edges") {
  const auto m = build_model(
      {binary_sensor("a"), binary_sensor("b"), binary_sensor("c")},
      {sub("s", {"a", "b"},
           {when({{"a", "On"}, {"b", "On"}}, {{"c", "On", 5}, {"b", "Off", 1}}),
            when({{"a", "On"}, {"b", "Off"}}, {{"c", "On", 2}})})});
  const auto g = derive_causal_graph(m);
  const std::vector<CausalEdge> expected = {
      {"a", "b", "s", 1}, {"a", "c", "s", 2}, {"b", "c", "s", 2}};
  CHECK(g.edges == expected);
}

TEST_CASE("thermostat graph is a 2-cycle") {
  const auto g = derive_causal_graph(scenario_model(test::bundled("thermostat.yaml")));
  const std::vector<CausalEdge> expected = {{"temp", "valve", "controller", 1},
                                            {"valve", "temp", "plant", 1}};
  CHECK(g.edges == expected);
  CHECK(causal_ancestors(g, "temp") ==
        AncestorSet{{"temp", "controller"}, {"valve", "plant"}});
  CHECK(causal_descendants(g, "temp") == std::set<SensorId>{"temp", "valve"});
}

TEST_CASE("causal ancestors on a chain") {
  const auto g = derive_causal_graph(scenario_model(test::bundled("sensor_chain.yaml")));
  CHECK(causal_ancestors(g, "a").empty());
  CHECK(causal_ancestors(g, "c") == AncestorSet{{"a", "link_ab"}, {"b", "link_bc"}});
  CHECK(causal_descendants(g, "a") == std::set<SensorId>{"b", "c"});
  CHECK_THROWS_AS(causal_ancestors(g, "nope"), ModelError);
  CHECK_THROWS_AS(causal_descendants(g, "nope"), ModelError);
}

TEST_CASE("shortest causal path") {
  const auto g = derive_causal_graph(scenario_model(knife_fixture()));
  const auto path = shortest_causal_path(g, {"lid_state"}, "knife_hardness");
  REQUIRE(path);
  const std::vector<CausalEdge> expected = {{"lid_state", "oven_temp", "oven_chamber", 2},
                                            {"oven_temp", "knife_temp", "knife", 3},
                                            {"knife_temp", "knife_hardness", "cooler", 1}};
  CHECK(*path == expected);
  CHECK(shortest_causal_path(g, {"knife_hardness"}, "knife_hardness")->empty());
  CHECK_FALSE(shortest_causal_path(g, {"knife_hardness"}, "lid_state"));

  const auto cyc = derive_causal_graph(scenario_model(test::bundled("thermostat.yaml")));
  const auto loop = shortest_causal_path(cyc, {"temp"}, "valve");
  REQUIRE(loop);
  CHECK(loop->size() == 1);
}

TEST_CASE("with_rules returns a new model and leaves the original intact") {
  const auto m = scenario_model(knife_fixture());
  const auto copy = m;
  const auto stripped = m.with_rules("lid_actuator", {});
  CHECK(stripped.subsystem("lid_actuator").rules.empty());
  CHECK(m == copy);
  CHECK(m.subsystem("lid_actuator").rules.size() == 2);
  CHECK_THROWS_AS(m.with_rules("lid_actuator", {when({{"lid_cmd", "Open"}}, {{"lid_state", "Open", 0}})}),
                  ModelError);
}

TEST_CASE("product sensors come from PRODUCT subsystems") {
  const auto m = scenario_model(knife_fixture());
  CHECK(m.product_sensors() == std::vector<SensorId>{"oven_temp", "knife_temp", "knife_hardness"});
}

namespace {

SystemModel pair_model(std::vector<Rule> p_rules, std::vector<Rule> q_rules,
                       const std::vector<SubsystemId>& priority = {}) {
  return build_model({binary_sensor("x"), binary_sensor("y"), binary_sensor("z"), binary_sensor("w")},
                     {sub("p", {"x", "y"}, std::move(p_rules)), sub("q", {"y", "z"}, std::move(q_rules))},
                     priority);
}

std::vector<std::vector<StateLabel>> label_rows(const Trace& t) {
  std::vector<std::vector<StateLabel>> rows;
  for (const auto& rec : t.ticks) rows.push_back(rec.labels);
  return rows;
}

Script kick(const SensorId& s, Tick at) {
  Script sc;
  sc.interventions.push_back({at, s, "On"});
  return sc;
}

}  // namespace

TEST_CASE("compose with a rule-less subsystem keeps behavior") {
  const auto m = pair_model({when({{"x", "On"}}, {{"y", "On", 1}}), when({{"x", "Off"}, {"y", "On"}}, {{"w", "On", 2}})}, {});
  const auto c = compose(m, "p", "q", "pq");
  CHECK(c.has_subsystem("pq"));
  CHECK_FALSE(c.has_subsystem("p"));
  CHECK(c.subsystem("pq").sensors.size() == 3);
  CHECK(label_rows(simulate(m, 1, kick("x", 3), 20)) == label_rows(simulate(c, 1, kick("x", 3), 20)));
}

TEST_CASE("compose of disjoint-target subsystems is trace-equivalent") {
  const auto m = pair_model({when({{"x", "On"}}, {{"w", "On", 1}})},
                            {when({{"z", "On"}}, {{"x", "On", 2}}), when({{"y", "On"}, {"z", "Off"}}, {{"z", "On", 1}})});
  const auto c = compose(m, "p", "q", "pq");
  for (const auto& s : {"x", "y", "z"}) {
    CHECK(label_rows(simulate(m, 1, kick(s, 2), 25)) == label_rows(simulate(c, 1, kick(s, 2), 25)));
  }
}

TEST_CASE("same-tick conflicts follow the priority order, before and after compose") {
  // Both subsystems write w at the same tick once y is On.
  const std::vector<Rule> p = {when({{"y", "On"}}, {{"w", "On", 1}})};
  const std::vector<Rule> q = {when({{"y", "On"}}, {{"w", "Off", 1}})};
  const auto pq = pair_model(p, q, {"p", "q"});
  const auto qp = pair_model(p, q, {"q", "p"});
  const auto a = simulate(pq, 1, kick("y", 0), 5);
  const auto b = simulate(qp, 1, kick("y", 0), 5);
  CHECK(a.labels("w").back() == "On");
  CHECK(b.labels("w").back() == "Off");
  CHECK(simulate(compose(pq, "p", "q", "c"), 1, kick("y", 0), 5).labels("w").back() == "On");
  CHECK(simulate(compose(qp, "q", "p", "c"), 1, kick("y", 0), 5).labels("w").back() == "Off");
}

TEST_CASE("compose errors") {
  const auto m = pair_model({}, {});
  CHECK_THROWS_AS(compose(m, "p", "nope", "c"), ModelError);
  CHECK_THROWS_AS(compose(m, "p", "p", "c"), ModelError);
  const auto tight = build_model({binary_sensor("x"), binary_sensor("y"), binary_sensor("z")},
                                 {sub("p", {"x", "y"}), sub("q", {"y", "z"})});
  CHECK_THROWS_AS(compose(tight, "p", "q", "c"), ModelError);
}

TEST_CASE("composed sensor sets are associative") {
  const auto m = build_model({binary_sensor("a"), binary_sensor("b"), binary_sensor("c"), binary_sensor("d"),
                              binary_sensor("e")},
                             {sub("A", {"a"}), sub("B", {"b", "c"}), sub("C", {"c", "d"})});
  const auto left = compose(compose(m, "A", "B", "AB"), "AB", "C", "X");
  const auto right = compose(compose(m, "B", "C", "BC"), "A", "BC", "X");
  auto sl = left.subsystem("X").sensors;
  auto sr = right.subsystem("X").sensors;
  std::sort(sl.begin(), sl.end());
  std::sort(sr.begin(), sr.end());
  CHECK(sl == sr);
  CHECK(sl == std::vector<SensorId>{"a", "b", "c", "d"});
}

TEST_CASE("random compose pairs are trace-equivalent on all initial states") {
  test::Gen gen(31337);
  const std::vector<SensorId> ps = {"x", "y"};
  const std::vector<SensorId> qs = {"y", "z"};
  const std::vector<SensorId> all = {"x", "y", "z", "w"};
  auto random_rules = [&](const std::vector<SensorId>& own) {
    std::vector<Rule> rules;
    // Each guard fixes every own sensor so distinct guards never overlap.
    std::set<SystemState> used;
    const std::size_t count = gen.below(4);
    for (std::size_t i = 0; i < count; ++i) {
      SystemState g;
      for (const auto& s : own) g[s] = gen.coin() ? "On" : "Off";
      if (!used.insert(g).second) continue;
      std::vector<Effect> effects;
      for (std::size_t k = 0, ne = 1 + gen.below(2); k < ne; ++k) {
        effects.push_back({gen.pick(all), gen.coin() ? "On" : "Off", 1});
      }
      rules.push_back({g, effects});
    }
    return rules;
  };
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = random_rules(ps);
    const auto q = random_rules(qs);
    const bool swap = gen.coin();
    for (std::size_t mask = 0; mask < 8; ++mask) {
      std::vector<Sensor> sensors;
      const std::vector<SensorId> ids = {"x", "y", "z"};
      for (std::size_t i = 0; i < 3; ++i) sensors.push_back(binary_sensor(ids[i], (mask >> i) & 1U ? "On" : "Off"));
      sensors.push_back(binary_sensor("w"));
      const auto m = build_model(sensors, {sub("p", ps, p), sub("q", qs, q)},
                                 swap ? std::vector<SubsystemId>{"q", "p"} : std::vector<SubsystemId>{"p", "q"});
      const auto c = swap ? compose(m, "q", "p", "c") : compose(m, "p", "q", "c");
      CHECK(label_rows(simulate(m, 0, {}, 12)) == label_rows(simulate(c, 0, {}, 12)));
    }
  }
}
