#include "ucm/model.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "ucm/error.hpp"

namespace ucm {

bool Sensor::has_state(std::string_view label) const { return state_index(label).has_value(); }

std::optional<std::size_t> Sensor::state_index(std::string_view label) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].label == label) return i;
  }
  return std::nullopt;
}

const Distribution& Sensor::distribution(std::string_view label) const {
  const auto idx = state_index(label);
  if (!idx) throw ModelError("sensor '" + id + "' has no state '" + std::string(label) + "'");
  return states[*idx].dist;
}

std::string_view to_string(SubsystemKind kind) {
  switch (kind) {
    case SubsystemKind::Component: return "component";
    case SubsystemKind::Module: return "module";
    case SubsystemKind::Product: return "product";
  }
  return "component";
}

std::optional<SubsystemKind> parse_subsystem_kind(std::string_view text) {
  if (text == "component") return SubsystemKind::Component;
  if (text == "module") return SubsystemKind::Module;
  if (text == "product") return SubsystemKind::Product;
  return std::nullopt;
}

bool guard_matches(const SystemState& guard, const SystemState& state) {
  for (const auto& [sensor, label] : guard) {
    const auto it = state.find(sensor);
    if (it == state.end() || it->second != label) return false;
  }
  return true;
}

namespace {

bool guards_compatible(const SystemState& a, const SystemState& b) {
  for (const auto& [sensor, label] : a) {
    const auto it = b.find(sensor);
    if (it != b.end() && it->second != label) return false;
  }
  return true;
}

std::string quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

void validate_sensor(const Sensor& s) {
  if (s.id.empty()) throw ModelError("sensor id must be nonempty");
  if (s.states.empty()) throw ModelError("sensor " + quoted(s.id) + " has no states");
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    if (s.states[i].label.empty()) {
      throw ModelError("sensor " + quoted(s.id) + " has an empty state label");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (s.states[i].label == s.states[j].label) {
        throw ModelError("duplicate state " + quoted(s.states[i].label) + " on sensor " +
                         quoted(s.id));
      }
      if (s.states[i].dist == s.states[j].dist) {
        throw ModelError("states " + quoted(s.states[j].label) + " and " +
                         quoted(s.states[i].label) + " of sensor " + quoted(s.id) +
                         " share a distribution");
      }
    }
  }
  if (!s.has_state(s.initial_state)) {
    throw ModelError("initial state " + quoted(s.initial_state) + " unknown for sensor " +
                     quoted(s.id));
  }
}

}  // namespace

bool SystemModel::has_sensor(std::string_view id) const {
  return sensor_index_.contains(std::string(id));
}

bool SystemModel::has_subsystem(std::string_view id) const {
  return subsystem_index_.contains(std::string(id));
}

std::size_t SystemModel::sensor_index(std::string_view id) const {
  const auto it = sensor_index_.find(std::string(id));
  if (it == sensor_index_.end()) throw ModelError("unknown sensor " + quoted(id));
  return it->second;
}

const Sensor& SystemModel::sensor(std::string_view id) const {
  return sensors_[sensor_index(id)];
}

std::size_t SystemModel::priority_rank(std::string_view id) const {
  const auto it = subsystem_index_.find(std::string(id));
  if (it == subsystem_index_.end()) throw ModelError("unknown subsystem " + quoted(id));
  return it->second;
}

const Subsystem& SystemModel::subsystem(std::string_view id) const {
  return subsystems_[priority_rank(id)];
}

std::vector<SubsystemId> SystemModel::priority_order() const {
  std::vector<SubsystemId> out;
  for (const auto& s : subsystems_) out.push_back(s.id);
  return out;
}

SystemState SystemModel::initial_state() const {
  SystemState state;
  for (const auto& s : sensors_) state.emplace(s.id, s.initial_state);
  return state;
}

std::vector<SensorId> SystemModel::product_sensors() const {
  std::set<SensorId> owned;
  for (const auto& sub : subsystems_) {
    if (sub.kind == SubsystemKind::Product) owned.insert(sub.sensors.begin(), sub.sensors.end());
  }
  std::vector<SensorId> out;
  for (const auto& s : sensors_) {
    if (owned.contains(s.id)) out.push_back(s.id);
  }
  return out;
}

SystemModel SystemModel::with_rules(std::string_view subsystem, std::vector<Rule> rules) const {
  validate_rules(*this, subsystem, rules);
  SystemModel copy = *this;
  copy.subsystems_[priority_rank(subsystem)].rules = std::move(rules);
  return copy;
}

void validate_rules(const SystemModel& model, std::string_view subsystem,
                    std::span<const Rule> rules) {
  const auto& owner = model.subsystem(subsystem);
  const std::set<SensorId> own(owner.sensors.begin(), owner.sensors.end());
  const auto where = [&](std::size_t r) {
    return "rule " + std::to_string(r) + " of " + quoted(owner.id);
  };

  for (std::size_t r = 0; r < rules.size(); ++r) {
    for (const auto& [sensor, label] : rules[r].guard) {
      if (!model.has_sensor(sensor)) throw ModelError(where(r) + ": unknown sensor " + quoted(sensor));
      if (!own.contains(sensor)) {
        throw ModelError(where(r) + ": guard reads " + quoted(sensor) +
                         " which is not a sensor of the subsystem");
      }
      if (!model.sensor(sensor).has_state(label)) {
        throw ModelError(where(r) + ": unknown state " + quoted(label) + " for sensor " +
                         quoted(sensor));
      }
    }
    for (const auto& e : rules[r].effects) {
      if (!model.has_sensor(e.target)) {
        throw ModelError(where(r) + ": unknown sensor " + quoted(e.target));
      }
      if (!model.sensor(e.target).has_state(e.state)) {
        throw ModelError(where(r) + ": unknown state " + quoted(e.state) + " for sensor " +
                         quoted(e.target));
      }
      if (e.delay < 1) throw ModelError(where(r) + ": effect must follow cause (delay >= 1)");
    }
  }

  // Conjunctions of equalities over valid labels are jointly satisfiable
  // exactly when they agree on every shared sensor.
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      if (guards_compatible(rules[i].guard, rules[j].guard)) {
        throw ModelError("nondeterministic functional representation: rules " +
                         std::to_string(i) + " and " + std::to_string(j) + " of " +
                         quoted(owner.id) + " have overlapping guards");
      }
    }
  }
}

SystemModel build_model(std::vector<Sensor> sensors, std::vector<Subsystem> subsystems,
                        const std::vector<SubsystemId>& priority) {
  SystemModel model;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    validate_sensor(sensors[i]);
    if (!model.sensor_index_.emplace(sensors[i].id, i).second) {
      throw ModelError("duplicate sensor id " + quoted(sensors[i].id));
    }
  }

  std::unordered_map<std::string, std::size_t> declared;
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    const auto& sub = subsystems[i];
    if (sub.id.empty()) throw ModelError("subsystem id must be nonempty");
    if (!declared.emplace(sub.id, i).second) {
      throw ModelError("duplicate subsystem id " + quoted(sub.id));
    }
    if (sub.sensors.empty()) throw ModelError("subsystem " + quoted(sub.id) + " has no sensors");
    std::set<SensorId> seen;
    for (const auto& s : sub.sensors) {
      if (!model.sensor_index_.contains(s)) {
        throw ModelError("subsystem " + quoted(sub.id) + ": unknown sensor " + quoted(s));
      }
      if (!seen.insert(s).second) {
        throw ModelError("subsystem " + quoted(sub.id) + " lists sensor " + quoted(s) + " twice");
      }
    }
    if (seen.size() >= sensors.size()) {
      throw ModelError("subsystem " + quoted(sub.id) +
                       " must observe a proper subset of the sensors");
    }
  }

  std::vector<std::size_t> order;
  if (priority.empty()) {
    for (std::size_t i = 0; i < subsystems.size(); ++i) order.push_back(i);
  } else {
    std::set<SubsystemId> used;
    for (const auto& id : priority) {
      const auto it = declared.find(id);
      if (it == declared.end()) throw ModelError("priority names unknown subsystem " + quoted(id));
      if (!used.insert(id).second) throw ModelError("priority lists " + quoted(id) + " twice");
      order.push_back(it->second);
    }
    if (order.size() != subsystems.size()) {
      throw ModelError("priority order must list every subsystem exactly once");
    }
  }

  model.sensors_ = std::move(sensors);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    model.subsystems_.push_back(std::move(subsystems[order[rank]]));
    model.subsystem_index_.emplace(model.subsystems_.back().id, rank);
  }
  for (const auto& sub : model.subsystems_) validate_rules(model, sub.id, sub.rules);
  return model;
}

namespace {

std::set<SensorId> guard_sensors(const std::vector<Rule>& rules) {
  std::set<SensorId> out;
  for (const auto& r : rules) {
    for (const auto& [sensor, label] : r.guard) out.insert(sensor);
  }
  return out;
}

/// Calls `visit` for every assignment of `free` sensors extending `base`.
template <typename Visit>
void for_each_extension(const SystemModel& model, const SystemState& base,
                        const std::vector<SensorId>& free, Visit&& visit) {
  SystemState state = base;
  std::vector<std::size_t> digit(free.size(), 0);
  while (true) {
    for (std::size_t k = 0; k < free.size(); ++k) {
      state[free[k]] = model.sensor(free[k]).states[digit[k]].label;
    }
    visit(state);
    std::size_t k = 0;
    for (; k < free.size(); ++k) {
      if (++digit[k] < model.sensor(free[k]).states.size()) break;
      digit[k] = 0;
    }
    if (k == free.size()) return;
  }
}

/// Rules of `alone` for the states where no rule of `other` matches.
void emit_unpaired(const SystemModel& model, const std::vector<Rule>& alone,
                   const std::vector<Rule>& other, std::vector<Rule>& out) {
  const auto other_sensors = guard_sensors(other);
  for (const auto& rule : alone) {
    std::vector<SensorId> free;
    for (const auto& s : other_sensors) {
      if (!rule.guard.contains(s)) free.push_back(s);
    }
    for_each_extension(model, rule.guard, free, [&](const SystemState& state) {
      const bool claimed = std::any_of(other.begin(), other.end(), [&](const Rule& r) {
        return guard_matches(r.guard, state);
      });
      if (!claimed) out.push_back(Rule{state, rule.effects});
    });
  }
}

}  // namespace

SystemModel compose(const SystemModel& model, std::string_view first, std::string_view second,
                    const SubsystemId& new_id) {
  if (first == second) throw ModelError("cannot compose a subsystem with itself");
  const auto& a = model.subsystem(first);
  const auto& b = model.subsystem(second);
  if (new_id.empty()) throw ModelError("composed subsystem id must be nonempty");
  if (model.has_subsystem(new_id) && new_id != a.id && new_id != b.id) {
    throw ModelError("composed id " + quoted(new_id) + " already names a subsystem");
  }

  std::set<SensorId> joint(a.sensors.begin(), a.sensors.end());
  joint.insert(b.sensors.begin(), b.sensors.end());
  if (joint.size() >= model.sensors().size()) {
    throw ModelError("composing " + quoted(a.id) + " and " + quoted(b.id) +
                     " would cover every sensor; a subsystem needs a proper subset");
  }

  Subsystem merged;
  merged.id = new_id;
  merged.kind = a.kind == b.kind ? a.kind : SubsystemKind::Component;
  for (const auto& s : model.sensors()) {
    if (joint.contains(s.id)) merged.sensors.push_back(s.id);
  }

  // Both fire in one tick: second's effects first so that first's writes,
  // applied later within the subsystem, win conflicts.
  for (const auto& ra : a.rules) {
    for (const auto& rb : b.rules) {
      if (!guards_compatible(ra.guard, rb.guard)) continue;
      Rule r;
      r.guard = ra.guard;
      r.guard.insert(rb.guard.begin(), rb.guard.end());
      r.effects = rb.effects;
      r.effects.insert(r.effects.end(), ra.effects.begin(), ra.effects.end());
      merged.rules.push_back(std::move(r));
    }
  }
  emit_unpaired(model, a.rules, b.rules, merged.rules);
  emit_unpaired(model, b.rules, a.rules, merged.rules);

  const auto slot = std::min(model.priority_rank(a.id), model.priority_rank(b.id));
  std::vector<Subsystem> subs;
  for (std::size_t rank = 0; rank < model.subsystems().size(); ++rank) {
    const auto& sub = model.subsystems()[rank];
    if (rank == slot) subs.push_back(merged);
    if (sub.id != a.id && sub.id != b.id) subs.push_back(sub);
  }
  return build_model(model.sensors(), std::move(subs));
}

bool CausalGraph::has_sensor(std::string_view id) const {
  return std::find(sensors.begin(), sensors.end(), id) != sensors.end();
}

CausalGraph derive_causal_graph(const SystemModel& model) {
  std::map<std::tuple<SensorId, SensorId, SubsystemId>, Tick> best;
  for (const auto& sub : model.subsystems()) {
    for (const auto& rule : sub.rules) {
      for (const auto& [cause, label] : rule.guard) {
        for (const auto& e : rule.effects) {
          if (e.target == cause) continue;
          const auto key = std::make_tuple(cause, e.target, sub.id);
          const auto it = best.find(key);
          if (it == best.end() || e.delay < it->second) best[key] = e.delay;
        }
      }
    }
  }
  CausalGraph graph;
  for (const auto& s : model.sensors()) graph.sensors.push_back(s.id);
  for (const auto& [key, delay] : best) {
    graph.edges.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), delay});
  }
  return graph;
}

namespace {

void require_sensor(const CausalGraph& graph, std::string_view sensor) {
  if (!graph.has_sensor(sensor)) throw ModelError("unknown sensor " + quoted(sensor));
}

}  // namespace

AncestorSet causal_ancestors(const CausalGraph& graph, std::string_view sensor) {
  require_sensor(graph, sensor);
  AncestorSet out;
  std::set<SensorId> visited{std::string(sensor)};
  std::deque<SensorId> frontier{std::string(sensor)};
  while (!frontier.empty()) {
    const auto current = frontier.front();
    frontier.pop_front();
    for (const auto& e : graph.edges) {
      if (e.effect != current) continue;
      out.emplace(e.cause, e.via);
      if (visited.insert(e.cause).second) frontier.push_back(e.cause);
    }
  }
  return out;
}

std::set<SensorId> causal_descendants(const CausalGraph& graph, std::string_view sensor) {
  require_sensor(graph, sensor);
  std::set<SensorId> out;
  std::set<SensorId> visited{std::string(sensor)};
  std::deque<SensorId> frontier{std::string(sensor)};
  while (!frontier.empty()) {
    const auto current = frontier.front();
    frontier.pop_front();
    for (const auto& e : graph.edges) {
      if (e.cause != current) continue;
      out.insert(e.effect);
      if (visited.insert(e.effect).second) frontier.push_back(e.effect);
    }
  }
  return out;
}

std::optional<std::vector<CausalEdge>> shortest_causal_path(const CausalGraph& graph,
                                                            const std::set<SensorId>& sources,
                                                            std::string_view target) {
  require_sensor(graph, target);
  if (sources.contains(std::string(target))) return std::vector<CausalEdge>{};

  std::map<SensorId, std::size_t> reached_by;  // sensor -> index of edge used
  std::deque<SensorId> frontier(sources.begin(), sources.end());
  std::set<SensorId> visited(sources.begin(), sources.end());
  while (!frontier.empty()) {
    const auto current = frontier.front();
    frontier.pop_front();
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
      const auto& e = graph.edges[i];
      if (e.cause != current || !visited.insert(e.effect).second) continue;
      reached_by[e.effect] = i;
      if (e.effect == target) {
        std::vector<CausalEdge> path;
        SensorId at(target);
        while (!sources.contains(at)) {
          const auto& edge = graph.edges[reached_by.at(at)];
          path.push_back(edge);
          at = edge.cause;
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      frontier.push_back(e.effect);
    }
  }
  return std::nullopt;
}

}  // namespace ucm
