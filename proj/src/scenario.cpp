#include "ucm/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ucm/error.hpp"
#include "ucm/format.hpp"

namespace ucm {

namespace {

std::size_t line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) {
  throw ScenarioError(line_of(node), field, what);
}

void expect_map(const YAML::Node& node, const std::string& field,
                std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) fail(node, field, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.Scalar();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(kv.first, field.empty() ? key : field + "." + key, "unknown field");
    }
  }
}

YAML::Node require(const YAML::Node& map, const std::string& field, const char* key) {
  const auto node = map[key];
  if (!node) fail(map, field.empty() ? std::string(key) : field + "." + key, "missing field");
  return node;
}

std::string text(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a scalar");
  const auto& s = node.Scalar();
  if (s.empty()) fail(node, field, "must be nonempty");
  return s;
}

double number(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a number");
  const auto v = parse_double(node.Scalar());
  if (!v) fail(node, field, "expected a number, got '" + node.Scalar() + "'");
  return *v;
}

std::int64_t integer(const YAML::Node& node, const std::string& field) {
  const double v = number(node, field);
  if (v != static_cast<double>(static_cast<std::int64_t>(v))) {
    fail(node, field, "expected an integer, got '" + node.Scalar() + "'");
  }
  return static_cast<std::int64_t>(v);
}

std::uint64_t unsigned_integer(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected an unsigned integer");
  const auto& s = node.Scalar();
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    fail(node, field, "expected an unsigned integer, got '" + s + "'");
  }
  return v;
}

template <typename Fn>
void each(const YAML::Node& node, const std::string& field, Fn&& fn) {
  if (!node) return;
  if (!node.IsSequence()) fail(node, field, "expected a list");
  for (std::size_t i = 0; i < node.size(); ++i) fn(node[i], field + "[" + std::to_string(i) + "]");
}

SystemState assignment(const YAML::Node& node, const std::string& field) {
  SystemState out;
  if (!node) return out;
  if (!node.IsMap()) fail(node, field, "expected a mapping of sensor: state");
  for (const auto& kv : node) {
    const auto sensor = text(kv.first, field);
    if (!out.emplace(sensor, text(kv.second, field + "." + sensor)).second) {
      fail(kv.first, field, "sensor '" + sensor + "' listed twice");
    }
  }
  return out;
}

Sensor parse_sensor(const YAML::Node& node, const std::string& field) {
  expect_map(node, field, {"id", "initial", "states"});
  Sensor s;
  s.id = text(require(node, field, "id"), field + ".id");
  s.initial_state = text(require(node, field, "initial"), field + ".initial");
  const auto states = require(node, field, "states");
  if (!states.IsMap()) fail(states, field + ".states", "expected a mapping of label: distribution");
  for (const auto& kv : states) {
    const auto label = text(kv.first, field + ".states");
    const auto where = field + ".states." + label;
    try {
      s.states.push_back({label, Distribution::parse(text(kv.second, where))});
    } catch (const std::invalid_argument& e) {
      fail(kv.second, where, e.what());
    }
  }
  return s;
}

Rule parse_rule(const YAML::Node& node, const std::string& field) {
  expect_map(node, field, {"when", "then"});
  Rule r;
  r.guard = assignment(node["when"], field + ".when");
  each(node["then"], field + ".then", [&](const YAML::Node& e, const std::string& f) {
    expect_map(e, f, {"sensor", "state", "delay"});
    r.effects.push_back({text(require(e, f, "sensor"), f + ".sensor"),
                         text(require(e, f, "state"), f + ".state"),
                         integer(require(e, f, "delay"), f + ".delay")});
  });
  return r;
}

std::vector<Rule> parse_rules(const YAML::Node& node, const std::string& field) {
  std::vector<Rule> rules;
  each(node, field, [&](const YAML::Node& r, const std::string& f) { rules.push_back(parse_rule(r, f)); });
  return rules;
}

Subsystem parse_subsystem(const YAML::Node& node, const std::string& field) {
  expect_map(node, field, {"id", "kind", "sensors", "rules"});
  Subsystem sub;
  sub.id = text(require(node, field, "id"), field + ".id");
  if (const auto kind = node["kind"]) {
    const auto parsed = parse_subsystem_kind(text(kind, field + ".kind"));
    if (!parsed) fail(kind, field + ".kind", "expected component, module or product");
    sub.kind = *parsed;
  }
  each(require(node, field, "sensors"), field + ".sensors",
       [&](const YAML::Node& s, const std::string& f) { sub.sensors.push_back(text(s, f)); });
  sub.rules = parse_rules(node["rules"], field + ".rules");
  return sub;
}

Functionality parse_functionality(const YAML::Node& node, const std::string& field) {
  expect_map(node, field, {"module", "name", "params", "duration", "transitions", "commands"});
  Functionality f;
  f.module = text(require(node, field, "module"), field + ".module");
  f.name = text(require(node, field, "name"), field + ".name");
  each(require(node, field, "params"), field + ".params",
       [&](const YAML::Node& p, const std::string& w) { f.parameter_domain.push_back(number(p, w)); });
  f.duration = integer(require(node, field, "duration"), field + ".duration");
  each(node["transitions"], field + ".transitions", [&](const YAML::Node& t, const std::string& w) {
    expect_map(t, w, {"when", "param", "then"});
    f.transitions.push_back({assignment(t["when"], w + ".when"),
                             number(require(t, w, "param"), w + ".param"),
                             assignment(require(t, w, "then"), w + ".then")});
  });
  each(node["commands"], field + ".commands", [&](const YAML::Node& c, const std::string& w) {
    expect_map(c, w, {"param", "offset", "sensor", "state"});
    Command cmd;
    if (const auto p = c["param"]) cmd.param = number(p, w + ".param");
    cmd.offset = integer(require(c, w, "offset"), w + ".offset");
    cmd.sensor = text(require(c, w, "sensor"), w + ".sensor");
    cmd.state = text(require(c, w, "state"), w + ".state");
    f.commands.push_back(std::move(cmd));
  });
  return f;
}

ScenarioDocument parse_document(const YAML::Node& root) {
  expect_map(root, "", {"name", "seed", "horizon", "detection", "sensors", "subsystems", "priority",
                        "functionalities", "faults", "script", "goal"});
  ScenarioDocument doc;
  if (const auto n = root["name"]) doc.name = text(n, "name");
  if (const auto n = root["seed"]) doc.seed = unsigned_integer(n, "seed");
  if (const auto n = root["horizon"]) {
    doc.horizon = integer(n, "horizon");
    if (doc.horizon < 1) fail(n, "horizon", "must be at least 1");
  }
  if (const auto d = root["detection"]) {
    expect_map(d, "detection", {"window", "stride", "alpha"});
    if (const auto n = d["window"]) {
      const auto w = integer(n, "detection.window");
      if (w < 1) fail(n, "detection.window", "must be at least 1");
      doc.detection.window = static_cast<std::size_t>(w);
    }
    if (const auto n = d["stride"]) {
      const auto s = integer(n, "detection.stride");
      if (s < 1) fail(n, "detection.stride", "must be at least 1");
      doc.detection.stride = static_cast<std::size_t>(s);
    }
    if (const auto n = d["alpha"]) {
      doc.detection.alpha = number(n, "detection.alpha");
      if (!(doc.detection.alpha > 0.0 && doc.detection.alpha < 1.0)) {
        fail(n, "detection.alpha", "must lie in (0,1)");
      }
    }
  }
  each(require(root, "", "sensors"), "sensors",
       [&](const YAML::Node& n, const std::string& f) { doc.sensors.push_back(parse_sensor(n, f)); });
  each(root["subsystems"], "subsystems", [&](const YAML::Node& n, const std::string& f) {
    doc.subsystems.push_back(parse_subsystem(n, f));
  });
  each(root["priority"], "priority",
       [&](const YAML::Node& n, const std::string& f) { doc.priority.push_back(text(n, f)); });
  each(root["functionalities"], "functionalities", [&](const YAML::Node& n, const std::string& f) {
    doc.functionalities.push_back(parse_functionality(n, f));
  });
  each(root["faults"], "faults", [&](const YAML::Node& n, const std::string& f) {
    expect_map(n, f, {"name", "component", "activation", "rules"});
    NamedFault nf;
    nf.name = text(require(n, f, "name"), f + ".name");
    nf.spec.component = text(require(n, f, "component"), f + ".component");
    if (const auto a = n["activation"]) nf.spec.activation = integer(a, f + ".activation");
    nf.spec.replacement_rules = parse_rules(n["rules"], f + ".rules");
    doc.faults.push_back(std::move(nf));
  });
  if (const auto script = root["script"]) {
    expect_map(script, "script", {"interventions", "faults"});
    each(script["interventions"], "script.interventions",
         [&](const YAML::Node& n, const std::string& f) {
           expect_map(n, f, {"tick", "sensor", "state"});
           doc.interventions.push_back({integer(require(n, f, "tick"), f + ".tick"),
                                        text(require(n, f, "sensor"), f + ".sensor"),
                                        text(require(n, f, "state"), f + ".state")});
         });
    each(script["faults"], "script.faults",
         [&](const YAML::Node& n, const std::string& f) { doc.active_faults.push_back(text(n, f)); });
  }
  doc.goal = assignment(root["goal"], "goal");
  return doc;
}

void emit_assignment(YAML::Emitter& out, const SystemState& s) {
  out << YAML::Flow << YAML::BeginMap;
  for (const auto& [sensor, label] : s) out << YAML::Key << sensor << YAML::Value << label;
  out << YAML::EndMap;
}

void emit_rules(YAML::Emitter& out, const std::vector<Rule>& rules) {
  if (rules.empty()) {
    out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
    return;
  }
  out << YAML::BeginSeq;
  for (const auto& r : rules) {
    out << YAML::BeginMap;
    out << YAML::Key << "when" << YAML::Value;
    emit_assignment(out, r.guard);
    out << YAML::Key << "then" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : r.effects) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "sensor" << YAML::Value << e.target
          << YAML::Key << "state" << YAML::Value << e.state << YAML::Key << "delay" << YAML::Value
          << e.delay << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

}  // namespace

ScenarioDocument parse_scenario(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ScenarioError(e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0, "",
                        "syntax error: " + e.msg);
  }
  try {
    return parse_document(root);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0, "",
                        e.msg);
  }
}

std::string serialize_scenario(const ScenarioDocument& doc) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  if (!doc.name.empty()) out << YAML::Key << "name" << YAML::Value << doc.name;
  out << YAML::Key << "seed" << YAML::Value << doc.seed;
  out << YAML::Key << "horizon" << YAML::Value << doc.horizon;
  out << YAML::Key << "detection" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "window" << YAML::Value << doc.detection.window;
  out << YAML::Key << "stride" << YAML::Value << doc.detection.stride;
  out << YAML::Key << "alpha" << YAML::Value << format_double(doc.detection.alpha);
  out << YAML::EndMap;

  out << YAML::Key << "sensors" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : doc.sensors) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << s.id;
    out << YAML::Key << "initial" << YAML::Value << s.initial_state;
    out << YAML::Key << "states" << YAML::Value << YAML::BeginMap;
    for (const auto& st : s.states) out << YAML::Key << st.label << YAML::Value << st.dist.to_string();
    out << YAML::EndMap << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "subsystems" << YAML::Value << YAML::BeginSeq;
  for (const auto& sub : doc.subsystems) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << sub.id;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(sub.kind));
    out << YAML::Key << "sensors" << YAML::Value << YAML::Flow << sub.sensors;
    out << YAML::Key << "rules" << YAML::Value;
    emit_rules(out, sub.rules);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (!doc.priority.empty()) {
    out << YAML::Key << "priority" << YAML::Value << YAML::Flow << doc.priority;
  }

  if (!doc.functionalities.empty()) {
    out << YAML::Key << "functionalities" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : doc.functionalities) {
      out << YAML::BeginMap;
      out << YAML::Key << "module" << YAML::Value << f.module;
      out << YAML::Key << "name" << YAML::Value << f.name;
      out << YAML::Key << "params" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double p : f.parameter_domain) out << format_double(p);
      out << YAML::EndSeq;
      out << YAML::Key << "duration" << YAML::Value << f.duration;
      out << YAML::Key << "transitions" << YAML::Value << YAML::BeginSeq;
      for (const auto& t : f.transitions) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "when" << YAML::Value;
        emit_assignment(out, t.when);
        out << YAML::Key << "param" << YAML::Value << format_double(t.param);
        out << YAML::Key << "then" << YAML::Value;
        emit_assignment(out, t.then);
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
      if (!f.commands.empty()) {
        out << YAML::Key << "commands" << YAML::Value << YAML::BeginSeq;
        for (const auto& c : f.commands) {
          out << YAML::Flow << YAML::BeginMap;
          if (c.param) out << YAML::Key << "param" << YAML::Value << format_double(*c.param);
          out << YAML::Key << "offset" << YAML::Value << c.offset;
          out << YAML::Key << "sensor" << YAML::Value << c.sensor;
          out << YAML::Key << "state" << YAML::Value << c.state;
          out << YAML::EndMap;
        }
        out << YAML::EndSeq;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (!doc.faults.empty()) {
    out << YAML::Key << "faults" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : doc.faults) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << f.name;
      out << YAML::Key << "component" << YAML::Value << f.spec.component;
      out << YAML::Key << "activation" << YAML::Value << f.spec.activation;
      out << YAML::Key << "rules" << YAML::Value;
      emit_rules(out, f.spec.replacement_rules);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  out << YAML::Key << "script" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "interventions" << YAML::Value << YAML::BeginSeq;
  for (const auto& i : doc.interventions) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "tick" << YAML::Value << i.tick << YAML::Key
        << "sensor" << YAML::Value << i.sensor << YAML::Key << "state" << YAML::Value << i.state
        << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "faults" << YAML::Value << YAML::Flow << doc.active_faults;
  out << YAML::EndMap;

  if (!doc.goal.empty()) {
    out << YAML::Key << "goal" << YAML::Value;
    emit_assignment(out, doc.goal);
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ScenarioDocument load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(0, "", "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

SystemModel scenario_model(const ScenarioDocument& doc) {
  return build_model(doc.sensors, doc.subsystems, doc.priority);
}

const FaultSpec& scenario_fault(const ScenarioDocument& doc, std::string_view name) {
  for (const auto& f : doc.faults) {
    if (f.name == name) return f.spec;
  }
  throw ModelError("scenario declares no fault named '" + std::string(name) + "'");
}

Script scenario_script(const ScenarioDocument& doc, const std::vector<std::string>& extra_faults) {
  Script script;
  script.interventions = doc.interventions;
  for (const auto& name : doc.active_faults) script.faults.push_back(scenario_fault(doc, name));
  for (const auto& name : extra_faults) script.faults.push_back(scenario_fault(doc, name));
  return script;
}

PlanningProblem scenario_problem(const ScenarioDocument& doc, const SystemState& goal) {
  return make_planning_problem(scenario_model(doc), doc.functionalities, goal);
}

void validate_scenario(const ScenarioDocument& doc) {
  const auto model = scenario_model(doc);
  std::set<std::string> names;
  for (const auto& f : doc.faults) {
    if (!names.insert(f.name).second) throw ModelError("fault '" + f.name + "' declared twice");
    validate_rules(model, f.spec.component, f.spec.replacement_rules);
  }
  for (const auto& name : doc.active_faults) scenario_fault(doc, name);
  for (const auto& i : doc.interventions) {
    if (i.tick < 0 || i.tick >= doc.horizon) {
      throw ModelError("intervention at tick " + std::to_string(i.tick) + " lies outside [0, horizon)");
    }
    if (!model.sensor(i.sensor).has_state(i.state)) {
      throw ModelError("intervention sets unknown state '" + i.state + "' on '" + i.sensor + "'");
    }
  }
  make_planning_problem(model, doc.functionalities, doc.goal);
}

}  // namespace ucm
