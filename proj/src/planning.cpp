#include "ucm/planning.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "ucm/format.hpp"

namespace ucm {

bool Functionality::accepts(double param) const {
  return std::find(parameter_domain.begin(), parameter_domain.end(), param) !=
         parameter_domain.end();
}

namespace {

const Functionality* find_functionality(const PlanningProblem& problem, const PlanStep& step) {
  for (const auto& f : problem.functionalities) {
    if (f.module == step.module && f.name == step.functionality) return &f;
  }
  return nullptr;
}

bool satisfies(const SystemState& state, const SystemState& goal) {
  return guard_matches(goal, state);
}

bool compatible(const SystemState& a, const SystemState& b) {
  for (const auto& [sensor, label] : a) {
    const auto it = b.find(sensor);
    if (it != b.end() && it->second != label) return false;
  }
  return true;
}

}  // namespace

void validate_problem(const PlanningProblem& problem) {
  const auto check_labels = [&](const SystemState& s, const std::string& where) {
    if (problem.domains.empty()) return;
    for (const auto& [sensor, label] : s) {
      const auto it = problem.domains.find(sensor);
      if (it == problem.domains.end()) {
        throw PlanningError(where + ": '" + sensor + "' is not a product sensor");
      }
      if (std::find(it->second.begin(), it->second.end(), label) == it->second.end()) {
        throw PlanningError(where + ": unknown state '" + label + "' for '" + sensor + "'");
      }
    }
  };

  std::set<std::pair<std::string, std::string>> names;
  for (const auto& f : problem.functionalities) {
    const auto where = f.qualified_name();
    if (f.module.empty() || f.name.empty()) throw PlanningError("functionality needs module and name");
    if (!names.emplace(f.module, f.name).second) throw PlanningError(where + " declared twice");
    if (f.duration < 1) throw PlanningError(where + ": duration must be at least 1");
    if (f.parameter_domain.empty()) throw PlanningError(where + ": empty parameter domain");
    for (std::size_t i = 0; i < f.parameter_domain.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (f.parameter_domain[i] == f.parameter_domain[j]) {
          throw PlanningError(where + ": parameter " + format_double(f.parameter_domain[i]) +
                              " listed twice");
        }
      }
    }
    for (std::size_t i = 0; i < f.transitions.size(); ++i) {
      const auto& t = f.transitions[i];
      if (!f.accepts(t.param)) {
        throw PlanningError(where + ": transition parameter " + format_double(t.param) +
                            " outside the domain");
      }
      check_labels(t.when, where);
      check_labels(t.then, where);
      for (std::size_t j = 0; j < i; ++j) {
        if (f.transitions[j].param == t.param && compatible(f.transitions[j].when, t.when)) {
          throw PlanningError(where + ": transitions " + std::to_string(j) + " and " +
                              std::to_string(i) + " overlap");
        }
      }
    }
  }
  check_labels(problem.goal, "goal");
  check_labels(problem.initial, "initial state");
  for (const auto& [sensor, labels] : problem.domains) {
    if (!problem.initial.contains(sensor)) {
      throw PlanningError("initial state misses product sensor '" + sensor + "'");
    }
  }
}

PlanningProblem make_planning_problem(const SystemModel& model,
                                      std::vector<Functionality> functionalities,
                                      SystemState goal) {
  PlanningProblem p;
  p.functionalities = std::move(functionalities);
  p.goal = std::move(goal);
  for (const auto& id : model.product_sensors()) {
    const auto& s = model.sensor(id);
    p.initial.emplace(id, s.initial_state);
    auto& labels = p.domains[id];
    for (const auto& st : s.states) labels.push_back(st.label);
  }
  for (const auto& f : p.functionalities) {
    if (model.has_subsystem(f.module) && model.subsystem(f.module).kind != SubsystemKind::Module) {
      throw PlanningError(f.qualified_name() + ": subsystem '" + f.module + "' is not a module");
    }
    for (const auto& c : f.commands) {
      if (!model.has_sensor(c.sensor) || !model.sensor(c.sensor).has_state(c.state)) {
        throw PlanningError(f.qualified_name() + ": command targets unknown " + c.sensor + "=" +
                            c.state);
      }
      if (c.offset < 0 || c.offset >= f.duration) {
        throw PlanningError(f.qualified_name() + ": command offset outside the step duration");
      }
      if (c.param && !f.accepts(*c.param)) {
        throw PlanningError(f.qualified_name() + ": command parameter outside the domain");
      }
    }
  }
  validate_problem(p);
  return p;
}

SystemState apply_functionality(const Functionality& f, double param, const SystemState& state) {
  if (!f.accepts(param)) {
    throw PlanningError(f.qualified_name() + ": parameter " + format_double(param) +
                        " outside the domain");
  }
  for (const auto& t : f.transitions) {
    if (t.param != param || !guard_matches(t.when, state)) continue;
    SystemState next = state;
    for (const auto& [sensor, label] : t.then) next[sensor] = label;
    return next;
  }
  return state;
}

namespace {

struct Action {
  const Functionality* f;
  std::size_t param_index;
};

/// Identifies a step for tie-breaking: module, functionality, parameter slot.
using StepKey = std::tuple<std::string, std::string, std::size_t>;

struct Node {
  Tick cost;
  std::size_t length;
  std::vector<StepKey> keys;
  std::vector<PlanStep> steps;
  SystemState state;

  auto rank() const { return std::tie(cost, length, keys); }
};

struct Worse {
  bool operator()(const Node& a, const Node& b) const { return a.rank() > b.rank(); }
};

}  // namespace

std::optional<Plan> plan(const PlanningProblem& problem) {
  validate_problem(problem);

  std::vector<Action> actions;
  for (const auto& f : problem.functionalities) {
    for (std::size_t i = 0; i < f.parameter_domain.size(); ++i) actions.push_back({&f, i});
  }

  std::priority_queue<Node, std::vector<Node>, Worse> open;
  open.push(Node{0, 0, {}, {}, problem.initial});
  std::set<SystemState> settled;
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (!settled.insert(node.state).second) continue;
    if (satisfies(node.state, problem.goal)) return Plan{std::move(node.steps), node.cost};

    for (const auto& a : actions) {
      const double param = a.f->parameter_domain[a.param_index];
      auto next = apply_functionality(*a.f, param, node.state);
      if (settled.contains(next)) continue;
      Node child{node.cost + a.f->duration, node.length + 1, node.keys, node.steps, std::move(next)};
      child.keys.emplace_back(a.f->module, a.f->name, a.param_index);
      child.steps.push_back({a.f->module, a.f->name, param});
      open.push(std::move(child));
    }
  }
  return std::nullopt;
}

bool validate_plan(const Plan& plan, const PlanningProblem& problem) {
  SystemState state = problem.initial;
  Tick duration = 0;
  for (const auto& step : plan.steps) {
    const auto* f = find_functionality(problem, step);
    if (f == nullptr || !f->accepts(step.parameter)) return false;
    state = apply_functionality(*f, step.parameter, state);
    duration += f->duration;
  }
  return duration == plan.total_duration && satisfies(state, problem.goal);
}

std::vector<Intervention> replay_plan(const Plan& plan, const PlanningProblem& problem,
                                      Tick start) {
  std::vector<Intervention> out;
  Tick cursor = start;
  for (const auto& step : plan.steps) {
    const auto* f = find_functionality(problem, step);
    if (f == nullptr) throw PlanningError("plan uses unknown functionality " + step.module + "." + step.functionality);
    for (const auto& c : f->commands) {
      if (c.param && *c.param != step.parameter) continue;
      out.push_back({cursor + c.offset, c.sensor, c.state});
    }
    cursor += f->duration;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Intervention& a, const Intervention& b) { return a.tick < b.tick; });
  return out;
}

}  // namespace ucm
