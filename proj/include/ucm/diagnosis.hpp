#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ucm/detection.hpp"
#include "ucm/error.hpp"
#include "ucm/model.hpp"
#include "ucm/simulation.hpp"

namespace ucm {

/// Synthetic component standing for a broken sensor: "sensor-fault:<id>".
inline constexpr std::string_view kSensorFaultPrefix = "sensor-fault:";

std::string sensor_fault_component(std::string_view sensor);
bool is_sensor_fault_component(std::string_view component);

struct FaultHypothesis {
  std::set<SubsystemId> components;
  std::size_t cardinality = 0;
  bool consistent = false;
  std::set<SensorId> explained;
  bool operator==(const FaultHypothesis&) const = default;
};

struct DiagnosisProblem {
  SystemModel model;
  /// Script of the fault-free reference run (faults, if any, are ignored).
  Script reference_script;
  Tick horizon = 0;
  std::vector<Deviation> deviations;
  std::set<SensorId> observed;
  std::size_t max_cardinality = 2;
};

class DiagnosisError : public Error {
 public:
  using Error::Error;
};

/// Consistency-based diagnosis under a weak-fault reading. A set H of
/// components is consistent when
///  (a) every observed deviating sensor belongs to, or descends causally from
///      a sensor of, some component in H, and
///  (b) re-running the reference script with the rules of every component in
///      H removed keeps each observed non-deviating sensor on its reference
///      state trajectory.
/// Returns the minimal consistent sets up to max_cardinality plus singleton
/// sensor-fault hypotheses, ranked by (cardinality, component ids).
std::vector<FaultHypothesis> diagnose(const DiagnosisProblem& problem);

struct CausalExplanation {
  SensorId deviating;
  std::vector<CausalEdge> path;  // empty when the sensor belongs to the hypothesis
  bool operator==(const CausalExplanation&) const = default;
};

/// One shortest causal path per explained sensor, from a sensor of some
/// hypothesized component.
std::vector<CausalExplanation> explain(const SystemModel& model, const FaultHypothesis& hypothesis,
                                       const CausalGraph& graph);

}  // namespace ucm
