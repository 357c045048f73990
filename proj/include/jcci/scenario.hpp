#pragma once

// Named reproduction scenarios: ordered steps, each an operation with its own
// parameters, producing CSV tables and SVG charts.
//
//   [scenario]
//   name = "fig3"
//
//   [scenario.step.curves]
//   op = "single_cci"
//   after = ["other_step"]
//   devices = ["pixel_3a", "nexus_4"]

#include <map>
#include <string>
#include <vector>

#include "jcci/grid.hpp"
#include "jcci/registry.hpp"
#include "jcci/textconf.hpp"

namespace jcci::scenario {

struct Step {
  std::string id;
  std::string op;
  std::vector<std::string> after;
  textconf::Section params;
};

struct Scenario {
  std::string name;
  std::string description;
  std::vector<Step> steps;
};

// Operation names run_scenario understands.
const std::vector<std::string>& known_ops();

// Unknown ops, dangling or cyclic dependencies, and unknown devices in a
// step's `devices` list all throw InvariantError.
void validate(const Scenario& s, const Registry& registry);

// Dependency order; ties keep file order.
std::vector<size_t> execution_order(const Scenario& s);

Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);

// Bundled scenario files live in <data>/scenarios/<name>.conf.
std::vector<std::string> bundled_scenarios(const std::string& data_dir);
std::string bundled_scenario_path(const std::string& data_dir, const std::string& name);

enum class OutputKind { kCsv, kSvg };

struct Output {
  std::string name;  // file name, e.g. "fig3.csv"
  OutputKind kind = OutputKind::kCsv;
  std::string content;
};

struct Bundle {
  std::vector<Output> outputs;
  std::vector<std::string> notes;
};

struct RunContext {
  const Registry* registry = nullptr;
  std::map<std::string, grid::GridTrace> traces;
  std::string data_dir;  // relative file parameters resolve here
};

// Errors from a step are rethrown with the step id and op prefixed, keeping
// their InputError/ModelError category.
Bundle run_scenario(const Scenario& s, const RunContext& ctx);

enum class Format { kCsv, kSvg, kBoth };
Format format_from_string(const std::string& s);

// Writes the selected outputs under dir (created if needed); returns the paths written.
std::vector<std::string> write_bundle(const Bundle& bundle, const std::string& dir, Format format);

}  // namespace jcci::scenario
