#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ucm/distributions.hpp"
#include "ucm/model.hpp"

namespace ucm {

enum class EventKind { RuleFired, EffectApplied, Intervention, FaultActivated };

std::string_view to_string(EventKind kind);

struct TraceEvent {
  Tick tick = 0;
  EventKind kind = EventKind::RuleFired;
  SubsystemId subsystem;  // RuleFired, EffectApplied, FaultActivated
  std::size_t rule = 0;   // RuleFired, EffectApplied
  SensorId sensor;        // EffectApplied, Intervention
  StateLabel state;       // EffectApplied, Intervention
  Tick fired_at = 0;      // EffectApplied: tick at which the rule fired
  bool operator==(const TraceEvent&) const = default;
};

struct TickRecord {
  Tick tick = 0;
  std::vector<double> values;      // one draw per sensor, trace column order
  std::vector<StateLabel> labels;  // ground-truth state per sensor
  std::vector<TraceEvent> events;
  bool operator==(const TickRecord&) const = default;
};

/// Time-indexed samples and ground truth. Record i holds tick i.
struct Trace {
  std::vector<SensorId> sensors;
  std::vector<TickRecord> ticks;

  std::size_t length() const { return ticks.size(); }
  std::size_t column(std::string_view sensor) const;
  std::vector<double> values(std::string_view sensor, std::size_t start, std::size_t length) const;
  std::vector<StateLabel> labels(std::string_view sensor) const;
  bool operator==(const Trace&) const = default;
};

/// Replacement behavior for a component from `activation` on.
struct FaultSpec {
  SubsystemId component;
  std::vector<Rule> replacement_rules;
  Tick activation = 0;
  bool operator==(const FaultSpec&) const = default;
};

/// Exogenous forcing of a sensor's state at `tick`.
struct Intervention {
  Tick tick = 0;
  SensorId sensor;
  StateLabel state;
  bool operator==(const Intervention&) const = default;
};

struct Script {
  std::vector<Intervention> interventions;
  std::vector<FaultSpec> faults;
  bool operator==(const Script&) const = default;
};

/// Single-owner discrete-time executor of a SystemModel.
///
/// Each step at tick t:
///  1. applies effects due at t, then interventions due at t (interventions win);
///  2. evaluates subsystems in priority order against the joint state and
///     queues the effects of each matching rule at t + delay;
///  3. draws one sample per sensor from its current state's law;
///  4. advances to t + 1.
/// Same-tick writes to one sensor resolve in favor of the higher-priority
/// subsystem, then the later (rule, firing tick, effect) within a subsystem.
class Simulator {
 public:
  Simulator(SystemModel model, std::uint64_t seed);

  Tick now() const { return now_; }
  const SystemModel& model() const { return model_; }
  SystemState state() const;
  const StateLabel& label(std::string_view sensor) const;

  /// Forces `sensor` into `state` at the next executed tick.
  void intervene(std::string_view sensor, std::string_view state);
  /// Forces a state change at a future (or the current) tick.
  void schedule(const Intervention& intervention);
  /// Swaps the component's rule table from `fault.activation` on (the
  /// current tick if activation already passed).
  void inject_fault(FaultSpec fault);
  void apply(const Script& script);

  const TickRecord& step();
  /// Steps until now() == horizon and returns everything recorded so far.
  const Trace& run(Tick horizon);
  const Trace& trace() const { return trace_; }

  /// Guard checks performed during the last step.
  std::size_t last_rule_evaluations() const { return last_evaluations_; }

 private:
  struct CompiledRule {
    std::vector<std::pair<std::size_t, std::size_t>> guard;    // sensor, state
    std::vector<std::tuple<std::size_t, std::size_t, Tick>> effects;  // sensor, state, delay
  };
  struct Pending {
    std::size_t sensor;
    std::size_t state;
    std::size_t rank;
    std::size_t rule;
    Tick fired_at;
    std::size_t effect;
  };
  struct PendingIntervention {
    std::size_t sensor;
    std::size_t state;
  };
  struct PendingFault {
    std::size_t rank;
    std::vector<CompiledRule> rules;
    Tick activation;
  };

  std::vector<CompiledRule> compile(const std::vector<Rule>& rules) const;
  std::size_t state_of(std::string_view sensor, std::string_view state) const;

  SystemModel model_;
  Rng rng_;
  Tick now_ = 0;
  std::vector<std::size_t> labels_;
  std::vector<std::vector<CompiledRule>> tables_;  // by priority rank
  std::map<Tick, std::vector<Pending>> queue_;
  std::map<Tick, std::vector<PendingIntervention>> interventions_;
  std::vector<PendingFault> faults_;
  Trace trace_;
  std::size_t last_evaluations_ = 0;
};

/// Fresh simulator, script applied, run to `horizon`.
Trace simulate(const SystemModel& model, std::uint64_t seed, const Script& script, Tick horizon);

}  // namespace ucm
