#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucm/io.hpp"
#include "ucm/scenario.hpp"

namespace ucm::test {

inline std::string scenario_path(const std::string& name) {
  return std::string(UCM_SCENARIO_DIR) + "/" + name;
}

inline ScenarioDocument bundled(const std::string& name) {
  return load_scenario_file(scenario_path(name));
}

inline const std::vector<std::string>& bundled_names() {
  static const std::vector<std::string> names = {"knife_hardening.yaml", "thermostat.yaml",
                                                 "sensor_chain.yaml", "compose_pair.yaml",
                                                 "workshop_plan.yaml"};
  return names;
}

/// SplitMix64; drives every property test so failures replay from the seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, n).
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  bool coin() { return (next() & 1U) != 0; }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::uint64_t s_;
};

/// Two-state sensor with well separated Normal states.
inline Sensor binary_sensor(const std::string& id, const std::string& initial = "Off") {
  return {id,
          {{"Off", Distribution::normal(0, 1)}, {"On", Distribution::normal(10, 1)}},
          initial};
}

inline Script interventions_only(const ScenarioDocument& doc) {
  Script s;
  s.interventions = doc.interventions;
  return s;
}

}  // namespace ucm::test
