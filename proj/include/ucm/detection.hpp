#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucm/distributions.hpp"
#include "ucm/model.hpp"
#include "ucm/simulation.hpp"

namespace ucm {

struct DetectionParams {
  std::size_t window = 50;
  std::size_t stride = 25;
  double alpha = kDefaultAlpha;
  bool operator==(const DetectionParams&) const = default;
};

struct Window {
  SensorId sensor;
  Tick start = 0;
  std::size_t length = 0;
  std::vector<double> values;
};

Window extract_window(const Trace& trace, std::string_view sensor, Tick start, std::size_t length);

struct EffectResult {
  bool effect = false;
  TestResult test;
};

/// Two-sample test between [t - w, t) and [t, t + w) of one sensor.
EffectResult detect_effect(const Trace& trace, std::string_view sensor, Tick t, std::size_t w,
                           double alpha);

struct AnomalyEntry {
  SensorId sensor;
  Tick window_start = 0;
  std::optional<StateLabel> matched;  // nullopt: ANOMALOUS
  std::vector<double> p_values;       // one per state of the sensor
  double p_best = 0.0;                // p-value backing the match (or best overall)
  bool transition = false;            // matched as two segments with one state change

  bool anomalous() const { return !matched.has_value(); }
};

struct AnomalyReport {
  double alpha = kDefaultAlpha;
  std::vector<AnomalyEntry> entries;  // sorted by (sensor, window_start)

  std::size_t anomalous_count() const;
};

/// Window-by-window state matching. A window that no single state explains is
/// accepted if some split point gives a prefix and a suffix that each match a
/// state (one state change inside the window); otherwise it is ANOMALOUS.
AnomalyReport scan_anomalies(const Trace& trace, const SystemModel& model,
                             const DetectionParams& params);

struct Deviation {
  SensorId sensor;
  Tick tick = 0;  // start of the offending window
  StateLabel expected;
  std::optional<StateLabel> matched;  // nullopt: ANOMALOUS
  bool operator==(const Deviation&) const = default;
};

/// Compares each window of `trace` with the ground truth of a fault-free
/// `reference` run. Windows over which the reference changes state carry no
/// single expectation and are skipped.
std::vector<Deviation> expected_state_check(const SystemModel& model, const Trace& trace,
                                            const Trace& reference, const DetectionParams& params);

}  // namespace ucm
