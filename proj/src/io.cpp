#include "ucm/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ucm/error.hpp"
#include "ucm/format.hpp"

namespace ucm {

namespace {

constexpr std::string_view kTraceHeader = "tick,sensor_id,value,state_label";
constexpr std::string_view kDeviationHeader = "sensor_id,tick,expected_state,matched_state";
constexpr std::string_view kAnomalous = "ANOMALOUS";

struct CsvRow {
  std::size_t line;
  std::vector<std::string_view> fields;
};

/// Splits `\n`-terminated comma-separated text; a trailing `\r` is dropped.
/// The first line must equal `header`. Blank lines are skipped.
std::vector<CsvRow> read_csv(std::string_view text, std::string_view header) {
  std::vector<CsvRow> rows;
  std::size_t line = 0;
  bool saw_header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto current = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line;
    if (!current.empty() && current.back() == '\r') current.remove_suffix(1);
    if (!saw_header) {
      if (current != header) throw ScenarioError(line, "header", "expected '" + std::string(header) + "'");
      saw_header = true;
      continue;
    }
    if (current.empty()) continue;
    CsvRow row{line, {}};
    std::size_t pos = 0;
    while (true) {
      const auto comma = current.find(',', pos);
      row.fields.push_back(current.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw ScenarioError(1, "header", "expected '" + std::string(header) + "'");
  return rows;
}

void expect_fields(const CsvRow& row, std::size_t n) {
  if (row.fields.size() != n) {
    throw ScenarioError(row.line, "row", "expected " + std::to_string(n) + " fields, got " +
                                             std::to_string(row.fields.size()));
  }
}

Tick read_tick(const CsvRow& row, std::size_t i, const char* field) {
  const auto v = parse_double(row.fields[i]);
  if (!v || *v < 0 || *v != static_cast<double>(static_cast<Tick>(*v))) {
    throw ScenarioError(row.line, field, "expected a tick, got '" + std::string(row.fields[i]) + "'");
  }
  return static_cast<Tick>(*v);
}

std::string read_id(const CsvRow& row, std::size_t i, const char* field) {
  if (row.fields[i].empty()) throw ScenarioError(row.line, field, "must be nonempty");
  return std::string(row.fields[i]);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string path_text(const CausalExplanation& e) {
  if (e.path.empty()) return e.deviating;
  std::string out = e.path.front().cause;
  for (const auto& edge : e.path) {
    out += ">" + edge.effect + "[" + edge.via + "/" + std::to_string(edge.delay) + "]";
  }
  return out;
}

struct HypothesisRow {
  std::string components;
  std::string explained;
  std::string paths;
};

HypothesisRow describe(const FaultHypothesis& h, const SystemModel& model, const CausalGraph& graph) {
  HypothesisRow row;
  row.components = join({h.components.begin(), h.components.end()}, ";");
  row.explained = join({h.explained.begin(), h.explained.end()}, ";");
  if (h.consistent) {
    std::vector<std::string> paths;
    for (const auto& e : explain(model, h, graph)) paths.push_back(path_text(e));
    row.paths = join(paths, ";");
  }
  return row;
}

const Functionality& lookup(const PlanningProblem& problem, const PlanStep& step) {
  for (const auto& f : problem.functionalities) {
    if (f.module == step.module && f.name == step.functionality) return f;
  }
  throw PlanningError("plan uses unknown functionality " + step.module + "." + step.functionality);
}

}  // namespace

std::string export_trace(const Trace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  std::vector<std::size_t> order(trace.sensors.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return trace.sensors[a] < trace.sensors[b]; });
  for (const auto& rec : trace.ticks) {
    const auto tick = std::to_string(rec.tick);
    for (auto c : order) {
      out += tick;
      out += ',';
      out += trace.sensors[c];
      out += ',';
      out += format_double(rec.values[c]);
      out += ',';
      out += rec.labels[c];
      out += '\n';
    }
  }
  return out;
}

Trace import_trace(std::string_view csv) {
  const auto rows = read_csv(csv, kTraceHeader);
  std::map<Tick, std::map<SensorId, std::pair<double, StateLabel>>> cells;
  std::set<SensorId> sensors;
  for (const auto& row : rows) {
    expect_fields(row, 4);
    const auto tick = read_tick(row, 0, "tick");
    auto sensor = read_id(row, 1, "sensor_id");
    const auto value = parse_double(row.fields[2]);
    if (!value) throw ScenarioError(row.line, "value", "expected a number, got '" + std::string(row.fields[2]) + "'");
    auto label = read_id(row, 3, "state_label");
    sensors.insert(sensor);
    if (!cells[tick].emplace(sensor, std::make_pair(*value, std::move(label))).second) {
      throw ScenarioError(row.line, "sensor_id", "duplicate row for '" + sensor + "'");
    }
  }

  Trace trace;
  trace.sensors.assign(sensors.begin(), sensors.end());
  Tick expected = 0;
  for (auto& [tick, row] : cells) {
    if (tick != expected) throw ScenarioError(0, "tick", "missing tick " + std::to_string(expected));
    if (row.size() != sensors.size()) {
      throw ScenarioError(0, "tick", "tick " + std::to_string(tick) + " lacks some sensors");
    }
    TickRecord rec;
    rec.tick = tick;
    for (auto& [sensor, cell] : row) {
      rec.values.push_back(cell.first);
      rec.labels.push_back(std::move(cell.second));
    }
    trace.ticks.push_back(std::move(rec));
    ++expected;
  }
  return trace;
}

std::string export_anomalies(const AnomalyReport& report) {
  std::string out = "sensor_id,window_start,matched_state,p_best,anomalous\n";
  for (const auto& e : report.entries) {
    out += e.sensor + "," + std::to_string(e.window_start) + "," +
           (e.matched ? *e.matched : std::string(kAnomalous)) + "," + format_double(e.p_best) +
           "," + (e.anomalous() ? "1" : "0") + "\n";
  }
  return out;
}

std::string export_deviations(const std::vector<Deviation>& deviations) {
  std::string out(kDeviationHeader);
  out += '\n';
  for (const auto& d : deviations) {
    out += d.sensor + "," + std::to_string(d.tick) + "," + d.expected + "," +
           (d.matched ? *d.matched : std::string(kAnomalous)) + "\n";
  }
  return out;
}

std::vector<Deviation> import_deviations(std::string_view csv) {
  std::vector<Deviation> out;
  for (const auto& row : read_csv(csv, kDeviationHeader)) {
    expect_fields(row, 4);
    Deviation d;
    d.sensor = read_id(row, 0, "sensor_id");
    d.tick = read_tick(row, 1, "tick");
    d.expected = read_id(row, 2, "expected_state");
    auto matched = read_id(row, 3, "matched_state");
    if (matched != kAnomalous) d.matched = std::move(matched);
    out.push_back(std::move(d));
  }
  return out;
}

std::string export_diagnosis(const std::vector<FaultHypothesis>& hypotheses,
                             const SystemModel& model) {
  const auto graph = derive_causal_graph(model);
  std::string out = "rank,components,cardinality,explained,paths\n";
  std::size_t rank = 0;
  for (const auto& h : hypotheses) {
    const auto row = describe(h, model, graph);
    out += std::to_string(++rank) + "," + row.components + "," + std::to_string(h.cardinality) +
           "," + row.explained + "," + row.paths + "\n";
  }
  return out;
}

std::string diagnosis_text(const std::vector<FaultHypothesis>& hypotheses,
                           const SystemModel& model) {
  const auto graph = derive_causal_graph(model);
  std::ostringstream out;
  std::size_t rank = 0;
  for (const auto& h : hypotheses) {
    out << "#" << ++rank << " {" << join({h.components.begin(), h.components.end()}, ", ")
        << "} cardinality " << h.cardinality << "\n";
    if (!h.consistent) continue;
    for (const auto& e : explain(model, h, graph)) out << "  " << path_text(e) << "\n";
  }
  return out.str();
}

std::string export_plan(const Plan& plan, const PlanningProblem& problem) {
  std::string out = "step,module,functionality,parameter,cumulative_duration\n";
  Tick cumulative = 0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    cumulative += lookup(problem, s).duration;
    out += std::to_string(i + 1) + "," + s.module + "," + s.functionality + "," +
           format_double(s.parameter) + "," + std::to_string(cumulative) + "\n";
  }
  return out;
}

std::string plan_text(const Plan& plan, const PlanningProblem& problem) {
  std::ostringstream out;
  Tick cumulative = 0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    cumulative += lookup(problem, s).duration;
    out << i + 1 << ". " << s.module << "." << s.functionality << "(" << format_double(s.parameter)
        << ") until t+" << cumulative << "\n";
  }
  out << "total duration " << plan.total_duration << "\n";
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace ucm
