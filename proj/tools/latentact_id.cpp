#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "latentact/scenario.hpp"

namespace {

// Builds the effective config: file contents when given, else a minimal
// document; command-line flags override the file's fields.
latentact::ScenarioConfig build_config(const std::string& config_path,
                                       const std::string& scenario,
                                       bool seed_given, std::uint64_t seed,
                                       const std::string& out_dir) {
  nlohmann::json doc;
  if (!config_path.empty()) {
    const latentact::ScenarioConfig from_file =
        latentact::validate_config_file(config_path);
    doc = nlohmann::json::parse(from_file.normalized_json);
  } else {
    doc = nlohmann::json::object();
  }
  if (!scenario.empty()) doc["scenario"] = scenario;
  if (seed_given || !doc.contains("seed")) doc["seed"] = seed;
  if (!out_dir.empty()) doc["out_dir"] = out_dir;
  return latentact::validate_config_text(doc.dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latentact-id: latent action identification scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scenario;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run one scenario and write its reports");
  auto* run_scenario_opt =
      run->add_option("--scenario", scenario, "Registered scenario name");
  auto* run_config_opt =
      run->add_option("--config", config_path, "Scenario config (JSON)")
          ->check(CLI::ExistingFile);
  auto* run_seed_opt = run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory for report artifacts");

  auto* validate = app.add_subcommand(
      "validate", "Validate a config file and print its normalized form");
  validate->add_option("--config", config_path, "Scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  app.add_subcommand("list-scenarios", "List registered scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (run_scenario_opt->count() == 0 && run_config_opt->count() == 0) {
        std::cerr << "error: provide --scenario and/or --config\n";
        return 2;
      }
      const latentact::ScenarioConfig config = build_config(
          config_path, scenario, run_seed_opt->count() > 0, seed, out_dir);
      const latentact::ScenarioReport report = latentact::run_scenario(config);
      for (const auto& c : report.criteria) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.value
                  << " " << c.comparison << " " << c.threshold << "\n";
      }
      std::cout << (report.pass ? "PASS" : "FAIL") << " " << report.scenario
                << " (" << report.wall_clock_sec << " s)\n";
      if (!config.out_dir.empty()) {
        std::cout << "artifacts written to " << config.out_dir << "\n";
      }
      return report.pass ? 0 : 1;
    }
    if (validate->parsed()) {
      const latentact::ScenarioConfig config =
          latentact::validate_config_file(config_path);
      std::cout << config.normalized_json << "\n";
      return 0;
    }
    // list-scenarios
    for (const auto& [name, description] : latentact::list_scenarios()) {
      std::cout << name << "  -  " << description << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
