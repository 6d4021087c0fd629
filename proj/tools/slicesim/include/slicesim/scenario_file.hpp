#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slicing/model.hpp"
#include "slicing/sim.hpp"

namespace slicesim {

/// Thrown for malformed scenario text. `line` is 0 for semantic errors that
/// are reported by key path instead.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0) : std::runtime_error(what), line(line) {}
  std::size_t line;
};

struct RunBlock {
  std::vector<slicing::sim::Engine> engines;
  double alpha = 1.0;
  double horizon = 1e4;
  slicing::sim::HorizonUnit horizon_unit = slicing::sim::HorizonUnit::time;
  double warmup = 0.1;
  std::vector<std::uint64_t> seeds{1};
};

struct SweepBlock {
  std::string parameter;  // key path, e.g. slices.s1.share or classes.*.arrival_rate
  std::vector<double> values;
};

struct ScenarioFile {
  /// Validates `raw`; throws slicing::ModelError.
  explicit ScenarioFile(slicing::InstanceSpec raw)
      : spec(std::move(raw)), instance(slicing::Instance::validate(spec)) {}

  int version = 1;
  std::string id;
  slicing::InstanceSpec spec;  // as written; validated copy below
  slicing::Instance instance;
  RunBlock run;
  std::optional<SweepBlock> sweep;

  /// Simulation scenario for one engine and seed.
  slicing::sim::Scenario scenario(const slicing::sim::Engine& engine, std::uint64_t seed) const;
  /// Copy with the sweep parameter set to `value` (shares re-balanced so they
  /// still sum to 1). Throws ParseError when the value breaks an invariant.
  ScenarioFile with_value(double value) const;
};

ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::string& path);

/// Sets one key path on a copy of the file; used by sweeps.
ScenarioFile apply_parameter(const ScenarioFile& file, std::string_view path, double value);

}  // namespace slicesim
