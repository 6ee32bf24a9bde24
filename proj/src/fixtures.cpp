#include "ucm/scenario.hpp"

namespace ucm {

namespace {

LabeledDistribution normal(const char* label, double mean, double sd) {
  return {label, Distribution::normal(mean, sd)};
}

LabeledDistribution point(const char* label, double v) {
  return {label, Distribution::degenerate(v)};
}

Rule rule(SystemState guard, std::vector<Effect> effects) {
  return {std::move(guard), std::move(effects)};
}

}  // namespace

ScenarioDocument knife_fixture() {
  ScenarioDocument doc;
  doc.name = "knife_hardening";
  doc.seed = 7;
  doc.horizon = 300;

  const std::vector<int> settings = {0, 25, 50, 75, 100};
  Sensor burner{"burner_set", {}, "Set0"};
  for (int v : settings) {
    burner.states.push_back({"Set" + std::to_string(v), Distribution::degenerate(v)});
  }
  doc.sensors = {
      burner,
      {"lid_cmd", {point("Open", 0), point("Close", 1)}, "Open"},
      {"lid_state", {normal("Open", 90, 2), normal("Closed", 0, 2)}, "Open"},
      {"oven_temp", {normal("Ambient", 20, 2), normal("Hot", 800, 10)}, "Ambient"},
      {"knife_temp", {normal("Cold", 20, 2), normal("Hot", 780, 15)}, "Cold"},
      {"knife_hardness", {normal("Soft", 20, 1.5), normal("Hard", 60, 1.5)}, "Soft"},
      {"quench_cmd", {point("Idle", 0), point("Active", 1)}, "Idle"},
  };

  Subsystem oven{"oven_chamber", SubsystemKind::Component, {"burner_set", "lid_state", "oven_temp"}, {}};
  oven.rules.push_back(rule({{"burner_set", "Set100"}, {"lid_state", "Closed"}},
                            {{"oven_temp", "Hot", 2}}));
  oven.rules.push_back(rule({{"lid_state", "Open"}}, {{"oven_temp", "Ambient", 2}}));
  for (int v : settings) {
    if (v == 100) continue;
    oven.rules.push_back(rule({{"burner_set", "Set" + std::to_string(v)}, {"lid_state", "Closed"}},
                              {{"oven_temp", "Ambient", 2}}));
  }

  doc.subsystems = {
      {"burner", SubsystemKind::Component, {"burner_set"}, {}},
      {"lid_actuator",
       SubsystemKind::Component,
       {"lid_cmd", "lid_state"},
       {rule({{"lid_cmd", "Open"}}, {{"lid_state", "Open", 1}}),
        rule({{"lid_cmd", "Close"}}, {{"lid_state", "Closed", 1}})}},
      oven,
      {"cooler",
       SubsystemKind::Module,
       {"quench_cmd", "knife_temp"},
       {rule({{"quench_cmd", "Active"}, {"knife_temp", "Hot"}},
             {{"knife_temp", "Cold", 1}, {"knife_hardness", "Hard", 1}})}},
      {"knife",
       SubsystemKind::Product,
       {"oven_temp", "knife_temp", "knife_hardness"},
       {rule({{"oven_temp", "Hot"}}, {{"knife_temp", "Hot", 3}})}},
  };

  Functionality heat{"oven", "heat", {0, 25, 50, 75, 100}, {}, 150, {}};
  heat.transitions.push_back({{{"knife_temp", "Cold"}}, 100, {{"knife_temp", "Hot"}}});
  heat.commands.push_back({std::nullopt, 0, "lid_cmd", "Close"});
  for (int v : settings) {
    heat.commands.push_back({static_cast<double>(v), 2, "burner_set", "Set" + std::to_string(v)});
  }
  heat.commands.push_back({std::nullopt, 145, "burner_set", "Set0"});
  heat.commands.push_back({std::nullopt, 145, "lid_cmd", "Open"});

  Functionality quench{"cooler", "quench", {0}, {}, 10, {{std::nullopt, 0, "quench_cmd", "Active"}}};
  quench.transitions.push_back({{{"knife_temp", "Hot"}, {"knife_hardness", "Soft"}},
                                0,
                                {{"knife_temp", "Cold"}, {"knife_hardness", "Hard"}}});
  quench.transitions.push_back(
      {{{"knife_temp", "Hot"}, {"knife_hardness", "Hard"}}, 0, {{"knife_temp", "Cold"}}});
  doc.functionalities = {heat, quench};

  doc.faults.push_back({"lid_stuck",
                        {"lid_actuator",
                         {rule({{"lid_cmd", "Open"}}, {{"lid_state", "Open", 1}}),
                          rule({{"lid_cmd", "Close"}}, {{"lid_state", "Open", 1}})},
                         0}});

  // Replay of [oven.heat(100), cooler.quench(0)] started at tick 50.
  doc.interventions = {
      {50, "lid_cmd", "Close"},
      {52, "burner_set", "Set100"},
      {195, "burner_set", "Set0"},
      {195, "lid_cmd", "Open"},
      {200, "quench_cmd", "Active"},
  };
  doc.goal = {{"knife_hardness", "Hard"}};
  return doc;
}

}  // namespace ucm
