#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "latren/io.hpp"

namespace latren {

const std::vector<std::string>& scenario_names();
const char* version_string();

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 1;
  nlohmann::json params;            // defaults merged in
  std::filesystem::path base_dir;   // relative file references resolve here
  std::string config_sha256;        // of the raw config bytes
};

/// Parses and validates a config document; unknown scenario names, unknown keys and wrong types
/// raise ConfigError.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ScenarioOutput {
  nlohmann::json report = nlohmann::json::object();
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::vector<double>>> samples;  // persisted as binary with a sidecar
  bool all_passed() const;
};

ScenarioOutput run_scenario(const ScenarioConfig& cfg);

/// Runs the scenario, writes manifest.json and one CSV per table into out_dir.
/// Returns 0 when every check passed, 2 otherwise.
int run_to_directory(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

nlohmann::json to_json(const Check& c);

}  // namespace latren
