#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace latentact {

// One named pass/fail check inside a scenario report; thresholds come from
// thresholds.hpp exclusively.
struct CriterionResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison;  // "<=", ">=", "==" (documentation only)
  bool pass = false;
};

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out_dir;            // empty: keep artifacts in memory only
  std::string normalized_json;    // canonical config document
};

struct ScenarioReport {
  std::string scenario;
  std::uint64_t seed = 0;
  bool pass = false;
  std::vector<CriterionResult> criteria;
  std::string report_json;   // full structured report (includes wall clock)
  std::string metrics_csv;
  std::string trace_csv;     // per-module trace when the scenario produces one
  double wall_clock_sec = 0.0;
};

// Parses, fills defaults, rejects unknown keys, and normalizes. The result's
// normalized_json round-trips to itself.
ScenarioConfig validate_config_text(const std::string& json_text);
ScenarioConfig validate_config_file(const std::string& path);

// Registered scenario names with one-line descriptions.
std::vector<std::pair<std::string, std::string>> list_scenarios();

// Executes one scenario deterministically; writes report.json, metrics.csv
// and trace.csv under config.out_dir when it is nonempty.
ScenarioReport run_scenario(const ScenarioConfig& config);

}  // namespace latentact
