#include "ucm/diagnosis.hpp"

#include <algorithm>
#include <map>

namespace ucm {

std::string sensor_fault_component(std::string_view sensor) {
  return std::string(kSensorFaultPrefix) + std::string(sensor);
}

bool is_sensor_fault_component(std::string_view component) {
  return component.starts_with(kSensorFaultPrefix);
}

namespace {

std::set<SensorId> sensors_of(const SystemModel& model, const SubsystemId& component) {
  if (is_sensor_fault_component(component)) {
    return {component.substr(kSensorFaultPrefix.size())};
  }
  const auto& sub = model.subsystem(component);
  return {sub.sensors.begin(), sub.sensors.end()};
}

/// Enumerates k-subsets of `items` in lexicographic order.
template <typename Visit>
void for_each_subset(const std::vector<SubsystemId>& items, std::size_t k, Visit&& visit) {
  if (k > items.size()) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::set<SubsystemId> subset;
    for (auto i : idx) subset.insert(items[i]);
    visit(subset);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

class Checker {
 public:
  explicit Checker(const DiagnosisProblem& p) : p_(p), graph_(derive_causal_graph(p.model)) {
    for (const auto& s : p.model.sensors()) reach_[s.id] = causal_descendants(graph_, s.id);
    for (const auto& d : p.deviations) {
      if (p.observed.contains(d.sensor)) deviating_.insert(d.sensor);
    }
    for (const auto& s : p.observed) {
      if (!deviating_.contains(s)) nominal_.insert(s);
    }
    script_.interventions = p.reference_script.interventions;
    const auto ref = simulate(p.model, 0, script_, p.horizon);
    for (const auto& s : nominal_) reference_[s] = ref.labels(s);
  }

  const std::set<SensorId>& deviating() const { return deviating_; }
  const std::map<SensorId, std::set<SensorId>>& reach() const { return reach_; }

  std::set<SensorId> covered_by(const std::set<SubsystemId>& components) const {
    std::set<SensorId> covered;
    for (const auto& c : components) {
      for (const auto& s : sensors_of(p_.model, c)) {
        covered.insert(s);
        const auto& down = reach_.at(s);
        covered.insert(down.begin(), down.end());
      }
    }
    return covered;
  }

  FaultHypothesis check(const std::set<SubsystemId>& components) const {
    FaultHypothesis h;
    h.components = components;
    h.cardinality = components.size();
    const auto covered = covered_by(components);
    std::set_intersection(deviating_.begin(), deviating_.end(), covered.begin(), covered.end(),
                          std::inserter(h.explained, h.explained.end()));
    h.consistent = h.explained == deviating_ && predicts_nominal(components);
    return h;
  }

 private:
  bool predicts_nominal(const std::set<SubsystemId>& components) const {
    auto model = p_.model;
    bool changed = false;
    for (const auto& c : components) {
      if (is_sensor_fault_component(c)) continue;
      if (!model.subsystem(c).rules.empty()) {
        model = model.with_rules(c, {});
        changed = true;
      }
    }
    if (!changed) return true;
    const auto predicted = simulate(model, 0, script_, p_.horizon);
    return std::all_of(reference_.begin(), reference_.end(), [&](const auto& entry) {
      return predicted.labels(entry.first) == entry.second;
    });
  }

  const DiagnosisProblem& p_;
  CausalGraph graph_;
  Script script_;
  std::map<SensorId, std::set<SensorId>> reach_;
  std::set<SensorId> deviating_;
  std::set<SensorId> nominal_;
  std::map<SensorId, std::vector<StateLabel>> reference_;
};

bool strict_superset_of_any(const std::set<SubsystemId>& candidate,
                            const std::vector<FaultHypothesis>& found) {
  return std::any_of(found.begin(), found.end(), [&](const FaultHypothesis& h) {
    return h.components.size() < candidate.size() &&
           std::includes(candidate.begin(), candidate.end(), h.components.begin(),
                         h.components.end());
  });
}

}  // namespace

std::vector<FaultHypothesis> diagnose(const DiagnosisProblem& problem) {
  if (problem.max_cardinality < 1) throw DiagnosisError("max_cardinality must be at least 1");
  if (problem.horizon < 1) throw DiagnosisError("reference horizon must be at least 1");
  for (const auto& s : problem.observed) {
    if (!problem.model.has_sensor(s)) throw DiagnosisError("observed sensor '" + s + "' is unknown");
  }
  for (const auto& d : problem.deviations) {
    if (!problem.model.has_sensor(d.sensor)) {
      throw DiagnosisError("deviation on unknown sensor '" + d.sensor + "'");
    }
  }

  const Checker checker(problem);
  if (checker.deviating().empty()) throw DiagnosisError("nothing to diagnose");

  std::vector<SubsystemId> components = problem.model.priority_order();
  std::sort(components.begin(), components.end());

  std::vector<FaultHypothesis> found;
  for (std::size_t k = 1; k <= problem.max_cardinality; ++k) {
    for_each_subset(components, k, [&](const std::set<SubsystemId>& subset) {
      if (strict_superset_of_any(subset, found)) return;
      auto h = checker.check(subset);
      if (h.consistent) found.push_back(std::move(h));
    });
  }

  // A deviating sensor whose observed descendants all behave nominally may be
  // the broken part itself. On a cycle the sensor is its own descendant.
  for (const auto& s : checker.deviating()) {
    const auto& down = checker.reach().at(s);
    const bool downstream_nominal = std::none_of(down.begin(), down.end(), [&](const SensorId& d) {
      return d != s && checker.deviating().contains(d);
    });
    if (!downstream_nominal) continue;
    auto h = checker.check({sensor_fault_component(s)});
    if (h.consistent) found.push_back(std::move(h));
  }

  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.cardinality != b.cardinality) return a.cardinality < b.cardinality;
    return a.components < b.components;
  });
  return found;
}

std::vector<CausalExplanation> explain(const SystemModel& model, const FaultHypothesis& hypothesis,
                                       const CausalGraph& graph) {
  if (!hypothesis.consistent) throw DiagnosisError("cannot explain an inconsistent hypothesis");
  std::set<SensorId> sources;
  for (const auto& c : hypothesis.components) {
    const auto own = sensors_of(model, c);
    sources.insert(own.begin(), own.end());
  }
  std::vector<CausalExplanation> out;
  for (const auto& s : hypothesis.explained) {
    auto path = shortest_causal_path(graph, sources, s);
    if (!path) throw DiagnosisError("no causal path reaches '" + s + "'");
    out.push_back({s, std::move(*path)});
  }
  return out;
}

}  // namespace ucm
