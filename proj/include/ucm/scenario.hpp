#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ucm/detection.hpp"
#include "ucm/diagnosis.hpp"
#include "ucm/model.hpp"
#include "ucm/planning.hpp"
#include "ucm/simulation.hpp"

namespace ucm {

struct NamedFault {
  std::string name;
  FaultSpec spec;
  bool operator==(const NamedFault&) const = default;
};

/// Everything a scenario file declares. Parsing checks the schema only;
/// validate_scenario() checks model semantics.
struct ScenarioDocument {
  std::string name;
  std::uint64_t seed = 0;
  Tick horizon = 100;
  DetectionParams detection;
  std::vector<Sensor> sensors;
  std::vector<Subsystem> subsystems;
  std::vector<SubsystemId> priority;  // empty: declaration order
  std::vector<Functionality> functionalities;
  std::vector<NamedFault> faults;      // available fault specs
  std::vector<Intervention> interventions;  // scripted
  std::vector<std::string> active_faults;   // scripted, by name
  SystemState goal;

  bool operator==(const ScenarioDocument&) const = default;
};

ScenarioDocument parse_scenario(std::string_view text);
std::string serialize_scenario(const ScenarioDocument& doc);

/// Reads and parses a scenario file. An unreadable file is a ScenarioError
/// at line 0.
ScenarioDocument load_scenario_file(const std::string& path);

SystemModel scenario_model(const ScenarioDocument& doc);
/// Builds the model and checks script, fault and functionality references.
void validate_scenario(const ScenarioDocument& doc);

const FaultSpec& scenario_fault(const ScenarioDocument& doc, std::string_view name);
/// The scripted interventions plus the scripted faults and `extra_faults`.
Script scenario_script(const ScenarioDocument& doc, const std::vector<std::string>& extra_faults = {});
PlanningProblem scenario_problem(const ScenarioDocument& doc, const SystemState& goal);

/// Knife hardening: a gas-fired oven with a lid heats the knife, a cooler
/// quenches it. The script is the replay of the optimal heat-then-quench plan
/// started at tick 50; fault "lid_stuck" keeps the lid open.
ScenarioDocument knife_fixture();

}  // namespace ucm
