#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ucm/detection.hpp"
#include "ucm/diagnosis.hpp"
#include "ucm/planning.hpp"
#include "ucm/simulation.hpp"

namespace ucm {

/// `tick,sensor_id,value,state_label`, rows by (tick, sensor_id), `\n` ends
/// every line. Values use the shortest round-trip decimal form.
std::string export_trace(const Trace& trace);
/// Inverse of export_trace. Columns come out sorted by sensor id; events are
/// not part of the format. Throws ScenarioError with the offending line.
Trace import_trace(std::string_view csv);

/// `sensor_id,window_start,matched_state,p_best,anomalous`; ANOMALOUS as the
/// matched state when no state fits.
std::string export_anomalies(const AnomalyReport& report);

/// `sensor_id,tick,expected_state,matched_state`.
std::string export_deviations(const std::vector<Deviation>& deviations);
std::vector<Deviation> import_deviations(std::string_view csv);

/// `rank,components,cardinality,explained,paths`. Lists inside a field are
/// separated by `;`; a path reads `a>b[via/delay]>c[via/delay]`.
std::string export_diagnosis(const std::vector<FaultHypothesis>& hypotheses,
                             const SystemModel& model);
std::string diagnosis_text(const std::vector<FaultHypothesis>& hypotheses,
                           const SystemModel& model);

/// `step,module,functionality,parameter,cumulative_duration`.
std::string export_plan(const Plan& plan, const PlanningProblem& problem);
std::string plan_text(const Plan& plan, const PlanningProblem& problem);

std::string read_text_file(const std::string& path);
/// Truncates and writes; throws Error on failure.
void write_text_file(const std::string& path, std::string_view text);

}  // namespace ucm
