#include "ucm/simulation.hpp"

#include <algorithm>
#include <stdexcept>

#include "ucm/error.hpp"

namespace ucm {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::RuleFired: return "RULE_FIRED";
    case EventKind::EffectApplied: return "EFFECT_APPLIED";
    case EventKind::Intervention: return "INTERVENTION";
    case EventKind::FaultActivated: return "FAULT_ACTIVATED";
  }
  return "RULE_FIRED";
}

std::size_t Trace::column(std::string_view sensor) const {
  const auto it = std::find(sensors.begin(), sensors.end(), sensor);
  if (it == sensors.end()) throw ModelError("trace has no sensor '" + std::string(sensor) + "'");
  return static_cast<std::size_t>(it - sensors.begin());
}

std::vector<double> Trace::values(std::string_view sensor, std::size_t start,
                                  std::size_t length) const {
  if (start + length > ticks.size()) throw std::out_of_range("window outside trace");
  const auto col = column(sensor);
  std::vector<double> out;
  out.reserve(length);
  for (std::size_t t = start; t < start + length; ++t) out.push_back(ticks[t].values[col]);
  return out;
}

std::vector<StateLabel> Trace::labels(std::string_view sensor) const {
  const auto col = column(sensor);
  std::vector<StateLabel> out;
  out.reserve(ticks.size());
  for (const auto& rec : ticks) out.push_back(rec.labels[col]);
  return out;
}

Simulator::Simulator(SystemModel model, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed) {
  for (const auto& s : model_.sensors()) {
    labels_.push_back(*s.state_index(s.initial_state));
    trace_.sensors.push_back(s.id);
  }
  for (const auto& sub : model_.subsystems()) tables_.push_back(compile(sub.rules));
}

std::vector<Simulator::CompiledRule> Simulator::compile(const std::vector<Rule>& rules) const {
  std::vector<CompiledRule> out;
  for (const auto& r : rules) {
    CompiledRule c;
    for (const auto& [sensor, label] : r.guard) c.guard.emplace_back(model_.sensor_index(sensor), state_of(sensor, label));
    for (const auto& e : r.effects) {
      c.effects.emplace_back(model_.sensor_index(e.target), state_of(e.target, e.state), e.delay);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::size_t Simulator::state_of(std::string_view sensor, std::string_view state) const {
  const auto idx = model_.sensor(sensor).state_index(state);
  if (!idx) {
    throw ModelError("unknown state '" + std::string(state) + "' for sensor '" +
                     std::string(sensor) + "'");
  }
  return *idx;
}

SystemState Simulator::state() const {
  SystemState out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out.emplace(model_.sensors()[i].id, model_.sensors()[i].states[labels_[i]].label);
  }
  return out;
}

const StateLabel& Simulator::label(std::string_view sensor) const {
  const auto i = model_.sensor_index(sensor);
  return model_.sensors()[i].states[labels_[i]].label;
}

void Simulator::intervene(std::string_view sensor, std::string_view state) {
  schedule(Intervention{now_, std::string(sensor), std::string(state)});
}

void Simulator::schedule(const Intervention& intervention) {
  if (intervention.tick < now_) {
    throw std::invalid_argument("intervention at tick " + std::to_string(intervention.tick) +
                                " is in the past");
  }
  interventions_[intervention.tick].push_back(
      {model_.sensor_index(intervention.sensor), state_of(intervention.sensor, intervention.state)});
}

void Simulator::inject_fault(FaultSpec fault) {
  validate_rules(model_, fault.component, fault.replacement_rules);
  faults_.push_back({model_.priority_rank(fault.component), compile(fault.replacement_rules),
                     std::max(fault.activation, now_)});
}

void Simulator::apply(const Script& script) {
  for (const auto& i : script.interventions) schedule(i);
  for (const auto& f : script.faults) inject_fault(f);
}

const TickRecord& Simulator::step() {
  TickRecord rec;
  rec.tick = now_;

  for (auto it = faults_.begin(); it != faults_.end();) {
    if (it->activation > now_) {
      ++it;
      continue;
    }
    tables_[it->rank] = std::move(it->rules);
    rec.events.push_back({now_, EventKind::FaultActivated, model_.subsystems()[it->rank].id});
    it = faults_.erase(it);
  }

  // Phase 1: due effects, then interventions.
  std::map<std::size_t, const Pending*> winners;
  if (const auto due = queue_.find(now_); due != queue_.end()) {
    const auto beats = [](const Pending& a, const Pending& b) {
      if (a.rank != b.rank) return a.rank < b.rank;
      return std::tie(a.rule, a.fired_at, a.effect) > std::tie(b.rule, b.fired_at, b.effect);
    };
    for (const auto& p : due->second) {
      auto& slot = winners[p.sensor];
      if (slot == nullptr || beats(p, *slot)) slot = &p;
    }
  }
  std::map<std::size_t, std::size_t> forced;
  if (const auto due = interventions_.find(now_); due != interventions_.end()) {
    for (const auto& i : due->second) forced[i.sensor] = i.state;
    for (const auto& i : due->second) {
      rec.events.push_back({now_, EventKind::Intervention, {}, 0, model_.sensors()[i.sensor].id,
                            model_.sensors()[i.sensor].states[i.state].label});
    }
    interventions_.erase(due);
  }
  for (const auto& [sensor, p] : winners) {
    if (forced.contains(sensor)) continue;
    labels_[sensor] = p->state;
    rec.events.push_back({now_, EventKind::EffectApplied, model_.subsystems()[p->rank].id, p->rule,
                          model_.sensors()[sensor].id, model_.sensors()[sensor].states[p->state].label,
                          p->fired_at});
  }
  for (const auto& [sensor, state] : forced) labels_[sensor] = state;
  queue_.erase(now_);

  // Phase 2: rule evaluation on the joint state.
  last_evaluations_ = 0;
  for (std::size_t rank = 0; rank < tables_.size(); ++rank) {
    const auto& table = tables_[rank];
    for (std::size_t r = 0; r < table.size(); ++r) {
      ++last_evaluations_;
      const auto& rule = table[r];
      const bool match = std::all_of(rule.guard.begin(), rule.guard.end(), [this](const auto& g) {
        return labels_[g.first] == g.second;
      });
      if (!match) continue;
      rec.events.push_back({now_, EventKind::RuleFired, model_.subsystems()[rank].id, r});
      for (std::size_t e = 0; e < rule.effects.size(); ++e) {
        const auto& [sensor, state, delay] = rule.effects[e];
        queue_[now_ + delay].push_back({sensor, state, rank, r, now_, e});
      }
    }
  }

  // Phase 3: sampling.
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto& st = model_.sensors()[i].states[labels_[i]];
    rec.values.push_back(draw(st.dist, rng_));
    rec.labels.push_back(st.label);
  }

  ++now_;
  trace_.ticks.push_back(std::move(rec));
  return trace_.ticks.back();
}

const Trace& Simulator::run(Tick horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  while (now_ < horizon) step();
  return trace_;
}

Trace simulate(const SystemModel& model, std::uint64_t seed, const Script& script, Tick horizon) {
  Simulator sim(model, seed);
  sim.apply(script);
  return sim.run(horizon);
}

}  // namespace ucm
