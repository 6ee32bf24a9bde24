#include "ucm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <set>

#include "ucm/detection.hpp"
#include "ucm/diagnosis.hpp"
#include "ucm/error.hpp"
#include "ucm/io.hpp"
#include "ucm/planning.hpp"
#include "ucm/scenario.hpp"
#include "ucm/simulation.hpp"

namespace ucm {

namespace {

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<Tick> horizon;
  std::optional<double> alpha;
  std::optional<std::size_t> window;
  std::optional<std::size_t> stride;
  std::size_t max_card = 2;
  std::vector<std::string> goals;
  std::vector<std::string> observe;
  std::vector<std::string> faults;
  std::string trace;
  std::string reference;
  std::string deviations;
  std::string anomalies;
};

/// Domain outcome that is not an error: exit 1 with a machine-readable reason.
struct DomainFailure {
  std::string reason;
  std::string detail;
};

class Usage : public Error {
 public:
  using Error::Error;
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

ScenarioDocument load(const Options& o) {
  auto doc = load_scenario_file(o.scenario);
  if (o.seed) doc.seed = *o.seed;
  if (o.horizon) {
    // A shortened run never reaches interventions past its end.
    doc.horizon = *o.horizon;
    std::erase_if(doc.interventions, [&](const Intervention& i) { return i.tick >= doc.horizon; });
  }
  if (o.alpha) doc.detection.alpha = *o.alpha;
  if (o.window) doc.detection.window = *o.window;
  if (o.stride) doc.detection.stride = *o.stride;
  validate_scenario(doc);
  return doc;
}

std::optional<DomainFailure> run_simulate(const Options& o, std::ostream& out) {
  const auto doc = load(o);
  const auto trace = simulate(scenario_model(doc), doc.seed, scenario_script(doc, o.faults), doc.horizon);
  emit(o.out, export_trace(trace), out);
  return std::nullopt;
}

std::optional<DomainFailure> run_detect(const Options& o, std::ostream& out) {
  const auto doc = load(o);
  const auto model = scenario_model(doc);
  const auto trace = import_trace(read_text_file(o.trace));
  for (const auto& s : model.sensors()) {
    if (std::find(trace.sensors.begin(), trace.sensors.end(), s.id) == trace.sensors.end()) {
      throw Usage("trace lacks sensor '" + s.id + "'");
    }
  }
  Trace reference;
  if (o.reference.empty()) {
    Script nominal;
    nominal.interventions = doc.interventions;
    reference = simulate(model, doc.seed, nominal, static_cast<Tick>(trace.length()));
  } else {
    reference = import_trace(read_text_file(o.reference));
  }
  if (!o.anomalies.empty()) {
    write_text_file(o.anomalies, export_anomalies(scan_anomalies(trace, model, doc.detection)));
  }
  emit(o.out, export_deviations(expected_state_check(model, trace, reference, doc.detection)), out);
  return std::nullopt;
}

std::optional<DomainFailure> run_diagnose(const Options& o, std::ostream& out) {
  const auto doc = load(o);
  DiagnosisProblem problem{scenario_model(doc), {}, doc.horizon, {}, {}, o.max_card};
  problem.reference_script.interventions = doc.interventions;
  problem.deviations = import_deviations(read_text_file(o.deviations));
  if (o.observe.empty()) {
    for (const auto& s : problem.model.sensors()) problem.observed.insert(s.id);
  } else {
    for (const auto& s : o.observe) {
      if (!problem.model.has_sensor(s)) throw Usage("--observe: unknown sensor '" + s + "'");
      problem.observed.insert(s);
    }
  }
  const bool any_observed = std::any_of(problem.deviations.begin(), problem.deviations.end(),
                                        [&](const Deviation& d) { return problem.observed.contains(d.sensor); });
  if (!any_observed) return DomainFailure{"NOTHING_TO_DIAGNOSE", "no deviation on an observed sensor"};

  auto hypotheses = diagnose(problem);
  std::erase_if(hypotheses, [](const FaultHypothesis& h) { return !h.consistent; });
  if (hypotheses.empty()) {
    return DomainFailure{"NO_CONSISTENT_HYPOTHESIS", "no hypothesis up to cardinality " +
                                                         std::to_string(o.max_card) +
                                                         " explains the deviations"};
  }
  if (o.out.empty()) {
    out << diagnosis_text(hypotheses, problem.model);
  } else {
    write_text_file(o.out, export_diagnosis(hypotheses, problem.model));
  }
  return std::nullopt;
}

SystemState parse_goal(const std::vector<std::string>& specs) {
  SystemState goal;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Usage("--goal expects sensor=State, got '" + spec + "'");
    }
    goal[spec.substr(0, eq)] = spec.substr(eq + 1);
  }
  return goal;
}

std::optional<DomainFailure> run_plan(const Options& o, std::ostream& out) {
  const auto doc = load(o);
  const auto goal = o.goals.empty() ? doc.goal : parse_goal(o.goals);
  const auto problem = scenario_problem(doc, goal);
  const auto result = plan(problem);
  if (!result) return DomainFailure{"NO_PLAN", "goal unreachable from the initial product state"};
  if (o.out.empty()) {
    out << plan_text(*result, problem);
  } else {
    write_text_file(o.out, export_plan(*result, problem));
  }
  return std::nullopt;
}

void add_scenario_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("scenario", o.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "overrides the scenario seed");
  cmd->add_option("--horizon", o.horizon, "overrides the scenario horizon")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output file (default: standard output)");
}

}  // namespace

int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uniform causality model toolkit", "ucm"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write its trace CSV");
  add_scenario_flags(sim, o);
  sim->add_option("--fault", o.faults, "activate a named fault (repeatable)");

  auto* det = app.add_subcommand("detect", "compare a trace with its expected states");
  add_scenario_flags(det, o);
  det->add_option("--trace", o.trace, "observed trace CSV")->required()->check(CLI::ExistingFile);
  det->add_option("--reference", o.reference, "fault-free trace CSV (default: simulated)")
      ->check(CLI::ExistingFile);
  det->add_option("--alpha", o.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  det->add_option("--window", o.window, "window length")->check(CLI::PositiveNumber);
  det->add_option("--stride", o.stride, "window stride")->check(CLI::PositiveNumber);
  det->add_option("--anomalies", o.anomalies, "also write the anomaly report CSV here");

  auto* dia = app.add_subcommand("diagnose", "rank fault hypotheses for a deviation set");
  add_scenario_flags(dia, o);
  dia->add_option("--deviations", o.deviations, "deviation CSV from detect")
      ->required()
      ->check(CLI::ExistingFile);
  dia->add_option("--observe", o.observe, "observed sensor (repeatable; default: all)");
  dia->add_option("--max-card", o.max_card, "largest hypothesis size")->check(CLI::PositiveNumber);

  auto* pln = app.add_subcommand("plan", "search a minimum-duration functionality sequence");
  add_scenario_flags(pln, o);
  pln->add_option("--goal", o.goals, "goal entry sensor=State (repeatable; default: scenario goal)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (o.alpha && (*o.alpha <= 0.0 || *o.alpha >= 1.0)) {
    err << "error: --alpha must lie in (0,1)\n";
    return kExitUsage;
  }

  try {
    std::optional<DomainFailure> failure;
    if (sim->parsed()) failure = run_simulate(o, out);
    if (det->parsed()) failure = run_detect(o, out);
    if (dia->parsed()) failure = run_diagnose(o, out);
    if (pln->parsed()) failure = run_plan(o, out);
    if (failure) {
      err << "reason=" << failure->reason << "\n" << failure->detail << "\n";
      return kExitDomainFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace ucm
