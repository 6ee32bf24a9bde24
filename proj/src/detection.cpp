#include "ucm/detection.hpp"

#include <algorithm>
#include <stdexcept>

#include "ucm/error.hpp"

namespace ucm {

namespace {

void check_params(const DetectionParams& p) {
  if (p.window == 0) throw std::invalid_argument("window length must be positive");
  if (p.stride == 0) throw std::invalid_argument("stride must be positive");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
}

std::vector<Tick> window_starts(std::size_t length, const DetectionParams& p) {
  if (p.window > length) {
    throw std::invalid_argument("window of " + std::to_string(p.window) +
                                " ticks exceeds trace length " + std::to_string(length));
  }
  std::vector<Tick> out;
  for (std::size_t s = 0; s + p.window <= length; s += p.stride) out.push_back(static_cast<Tick>(s));
  return out;
}

std::vector<SensorId> sorted_sensor_ids(const SystemModel& model) {
  std::vector<SensorId> ids;
  for (const auto& s : model.sensors()) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<double> p_values_of(const StateMatch& m) {
  std::vector<double> out;
  for (const auto& r : m.per_state) out.push_back(r.p_value);
  return out;
}

double matched_p(const StateMatch& m, std::span<const LabeledDistribution> states) {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (m.label && states[i].label == *m.label) return m.per_state[i].p_value;
  }
  return m.best_p();
}

}  // namespace

Window extract_window(const Trace& trace, std::string_view sensor, Tick start, std::size_t length) {
  if (start < 0) throw std::out_of_range("window starts before the trace");
  return Window{std::string(sensor), start, length,
                trace.values(sensor, static_cast<std::size_t>(start), length)};
}

EffectResult detect_effect(const Trace& trace, std::string_view sensor, Tick t, std::size_t w,
                           double alpha) {
  if (w == 0) throw std::invalid_argument("window length must be positive");
  if (t < static_cast<Tick>(w) || static_cast<std::size_t>(t) + w > trace.length()) {
    throw std::out_of_range("effect windows around tick " + std::to_string(t) +
                            " fall outside the trace");
  }
  const auto before = extract_window(trace, sensor, t - static_cast<Tick>(w), w);
  const auto after = extract_window(trace, sensor, t, w);
  const auto test = two_sample_test(before.values, after.values);
  return {test.p_value < alpha, test};
}

std::size_t AnomalyReport::anomalous_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.anomalous(); }));
}

AnomalyReport scan_anomalies(const Trace& trace, const SystemModel& model,
                             const DetectionParams& params) {
  check_params(params);
  AnomalyReport report;
  report.alpha = params.alpha;
  const auto starts = window_starts(trace.length(), params);

  for (const auto& id : sorted_sensor_ids(model)) {
    const auto& states = model.sensor(id).states;
    for (const auto start : starts) {
      const auto values = trace.values(id, static_cast<std::size_t>(start), params.window);
      const auto whole = match_state(values, states, params.alpha);

      AnomalyEntry entry{id, start, whole.label, p_values_of(whole), matched_p(whole, states)};
      if (whole.anomalous()) {
        const std::span<const double> all(values);
        double best_floor = -1.0;
        for (std::size_t k = 1; k < values.size(); ++k) {
          const auto head = match_state(all.first(k), states, params.alpha);
          if (head.anomalous()) continue;
          const auto tail = match_state(all.subspan(k), states, params.alpha);
          if (tail.anomalous()) continue;
          const double floor = std::min(matched_p(head, states), matched_p(tail, states));
          if (floor > best_floor) {
            best_floor = floor;
            entry.matched = tail.label;
            entry.p_values = p_values_of(tail);
            entry.p_best = matched_p(tail, states);
            entry.transition = true;
          }
        }
      }
      report.entries.push_back(std::move(entry));
    }
  }
  return report;
}

std::vector<Deviation> expected_state_check(const SystemModel& model, const Trace& trace,
                                            const Trace& reference, const DetectionParams& params) {
  check_params(params);
  if (trace.length() != reference.length()) {
    throw std::invalid_argument("trace and reference differ in length (" +
                                std::to_string(trace.length()) + " vs " +
                                std::to_string(reference.length()) + ")");
  }
  const auto starts = window_starts(trace.length(), params);

  std::vector<Deviation> out;
  for (const auto& id : sorted_sensor_ids(model)) {
    const auto& states = model.sensor(id).states;
    const auto expected = reference.labels(id);
    for (const auto start : starts) {
      const auto first = expected.begin() + start;
      const auto last = first + static_cast<std::ptrdiff_t>(params.window);
      if (std::adjacent_find(first, last, std::not_equal_to<>()) != last) continue;

      const auto values = trace.values(id, static_cast<std::size_t>(start), params.window);
      const auto match = match_state(values, states, params.alpha);
      if (match.anomalous() || *match.label != *first) {
        out.push_back({id, start, *first, match.label});
      }
    }
  }
  return out;
}

}  // namespace ucm
