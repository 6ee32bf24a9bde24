#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ucm/distributions.hpp"

namespace ucm {

using SensorId = std::string;
using StateLabel = std::string;
using SubsystemId = std::string;

/// Discrete time index. Delays are measured in ticks as well.
using Tick = std::int64_t;

/// Map from sensor to state label. Total when it describes the whole system,
/// partial when used as a rule guard or a goal.
using SystemState = std::map<SensorId, StateLabel>;

struct Sensor {
  SensorId id;
  std::vector<LabeledDistribution> states;
  StateLabel initial_state;

  bool has_state(std::string_view label) const;
  std::optional<std::size_t> state_index(std::string_view label) const;
  const Distribution& distribution(std::string_view label) const;

  bool operator==(const Sensor&) const = default;
};

struct Effect {
  SensorId target;
  StateLabel state;
  Tick delay = 1;
  bool operator==(const Effect&) const = default;
};

/// One row of a functional representation: when the subsystem's sensors match
/// `guard`, every effect is scheduled `delay` ticks later.
struct Rule {
  SystemState guard;
  std::vector<Effect> effects;
  bool operator==(const Rule&) const = default;
};

enum class SubsystemKind { Component, Module, Product };

std::string_view to_string(SubsystemKind kind);
std::optional<SubsystemKind> parse_subsystem_kind(std::string_view text);

struct Subsystem {
  SubsystemId id;
  SubsystemKind kind = SubsystemKind::Component;
  std::vector<SensorId> sensors;
  std::vector<Rule> rules;
  bool operator==(const Subsystem&) const = default;
};

bool guard_matches(const SystemState& guard, const SystemState& state);

class SystemModel;

/// Validates and assembles a model. `priority` lists every subsystem id once,
/// highest priority first; empty means declaration order.
SystemModel build_model(std::vector<Sensor> sensors, std::vector<Subsystem> subsystems,
                        const std::vector<SubsystemId>& priority = {});

/// Immutable causal construction: sensors plus subsystems in priority order.
class SystemModel {
 public:
  const std::vector<Sensor>& sensors() const { return sensors_; }
  /// Subsystems ordered by priority, highest first.
  const std::vector<Subsystem>& subsystems() const { return subsystems_; }

  bool has_sensor(std::string_view id) const;
  bool has_subsystem(std::string_view id) const;
  const Sensor& sensor(std::string_view id) const;
  std::size_t sensor_index(std::string_view id) const;
  const Subsystem& subsystem(std::string_view id) const;
  std::size_t priority_rank(std::string_view id) const;

  std::vector<SubsystemId> priority_order() const;
  SystemState initial_state() const;
  /// Sensors owned by PRODUCT-kind subsystems, in model order.
  std::vector<SensorId> product_sensors() const;

  /// Copy of this model with one subsystem's rule table replaced. The new
  /// rules are validated like the originals.
  SystemModel with_rules(std::string_view subsystem, std::vector<Rule> rules) const;

  bool operator==(const SystemModel& other) const {
    return sensors_ == other.sensors_ && subsystems_ == other.subsystems_;
  }

 private:
  friend SystemModel build_model(std::vector<Sensor>, std::vector<Subsystem>,
                                 const std::vector<SubsystemId>&);
  SystemModel() = default;

  std::vector<Sensor> sensors_;
  std::vector<Subsystem> subsystems_;
  std::unordered_map<std::string, std::size_t> sensor_index_;
  std::unordered_map<std::string, std::size_t> subsystem_index_;
};

/// Checks `rules` as a rule table of `subsystem` within `model`: guards only
/// over the subsystem's sensors, valid labels, delay >= 1, and no two guards
/// satisfiable by the same subsystem state.
void validate_rules(const SystemModel& model, std::string_view subsystem,
                    std::span<const Rule> rules);

/// Merges two subsystems into one over the union of their sensors. Within a
/// tick the merged table behaves like `first` followed by `second`, with
/// `first` winning conflicting writes.
SystemModel compose(const SystemModel& model, std::string_view first, std::string_view second,
                    const SubsystemId& new_id);

struct CausalEdge {
  SensorId cause;
  SensorId effect;
  SubsystemId via;
  Tick delay = 1;
  bool operator==(const CausalEdge&) const = default;
};

struct CausalGraph {
  std::vector<SensorId> sensors;  // every model sensor, model order
  std::vector<CausalEdge> edges;  // sorted by (cause, effect, via)

  bool has_sensor(std::string_view id) const;
  bool operator==(const CausalGraph&) const = default;
};

CausalGraph derive_causal_graph(const SystemModel& model);

using AncestorSet = std::set<std::pair<SensorId, SubsystemId>>;

/// Every (sensor, via-subsystem) pair from which `sensor` can be reached.
AncestorSet causal_ancestors(const CausalGraph& graph, std::string_view sensor);
/// Every sensor reachable from `sensor` along at least one edge.
std::set<SensorId> causal_descendants(const CausalGraph& graph, std::string_view sensor);

/// Shortest edge path from any of `sources` to `target` (BFS, deterministic
/// tie-breaking by edge order). Empty path when target is itself a source;
/// nullopt when unreachable.
std::optional<std::vector<CausalEdge>> shortest_causal_path(const CausalGraph& graph,
                                                            const std::set<SensorId>& sources,
                                                            std::string_view target);

}  // namespace ucm
