#pragma once

// Check suites and the run configuration shared by the CLI and the tests.

#include "shls/report.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shls::suites {

struct RunConfig {
  std::string suite = "all";  // spectral | subordination | continuum | functionals | mc | all
  std::string chain = "builtin:two-state";
  int grid_n = 48;
  double grid_extent = 8.0;
  std::vector<double> alphas{1.0};
  std::vector<double> ps{1.5, 2.0};
  std::size_t paths = 100000;
  double dt = 0.01;
  std::vector<double> s_values{1.0, 5.0};
  double truncation = 1e3;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool strict = false;
  bool write_paths = false;

  /// Field-by-field overlay of a JSON document; unknown keys are errors.
  void merge_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

const std::vector<std::string>& suite_names();

/// Runs one suite and appends its checks. Exceptions propagate.
void run_suite(const std::string& name, const RunConfig& cfg, RunReport& report);

/// Runs the selected suites in order. A suite that throws is recorded in
/// report.errors and the remaining suites still run.
RunReport run(const RunConfig& cfg);

struct CheckInfo {
  std::string name;
  std::string suite;
  std::string anchor;
  std::string formula;
  std::string oracle;
  std::string tolerance;
};

const std::vector<CheckInfo>& catalog();
/// nullptr when the name is unknown.
const CheckInfo* find_check(const std::string& name);

}  // namespace shls::suites
