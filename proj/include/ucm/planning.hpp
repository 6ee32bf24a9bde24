#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ucm/error.hpp"
#include "ucm/model.hpp"
#include "ucm/simulation.hpp"

namespace ucm {

/// Row of a functionality's transition table: under parameter `param`, a
/// product state matching `when` has the entries of `then` overwritten.
struct Transition {
  SystemState when;
  double param = 0.0;
  SystemState then;
  bool operator==(const Transition&) const = default;
};

/// Simulator-level command issued when a functionality runs. `param` limits
/// it to one parameter value; `offset` counts from the step's start tick.
struct Command {
  std::optional<double> param;
  Tick offset = 0;
  SensorId sensor;
  StateLabel state;
  bool operator==(const Command&) const = default;
};

struct Functionality {
  SubsystemId module;
  std::string name;
  std::vector<double> parameter_domain;
  std::vector<Transition> transitions;
  Tick duration = 1;
  std::vector<Command> commands;

  std::string qualified_name() const { return module + "." + name; }
  bool accepts(double param) const;
  bool operator==(const Functionality&) const = default;
};

struct PlanningProblem {
  std::vector<Functionality> functionalities;
  SystemState initial;  // total over the product sensors
  SystemState goal;     // partial
  /// Labels of each product sensor. Used for validation only.
  std::map<SensorId, std::vector<StateLabel>> domains;
};

struct PlanStep {
  SubsystemId module;
  std::string functionality;
  double parameter = 0.0;
  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  Tick total_duration = 0;
  bool operator==(const Plan&) const = default;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

/// Problem over the model's product sensors, starting from their initial
/// states. Validates the result.
PlanningProblem make_planning_problem(const SystemModel& model,
                                      std::vector<Functionality> functionalities,
                                      SystemState goal);

/// Throws PlanningError when a table is not a function, a parameter lies
/// outside its domain, a label is unknown, or a functionality touches
/// non-product sensors.
void validate_problem(const PlanningProblem& problem);

SystemState apply_functionality(const Functionality& f, double param, const SystemState& state);

/// Uniform-cost search over product states. Minimizes total duration, then
/// plan length, then the step sequence ordered by (module, functionality,
/// parameter position in its domain). nullopt when the goal is unreachable.
std::optional<Plan> plan(const PlanningProblem& problem);

bool validate_plan(const Plan& plan, const PlanningProblem& problem);

/// Timed interventions that execute `plan` in the simulator from `start`.
std::vector<Intervention> replay_plan(const Plan& plan, const PlanningProblem& problem, Tick start);

}  // namespace ucm
