#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "latren/io.hpp"
#include "latren/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Arithmetic implicit renewal experiments"};
  app.set_version_flag("--version", std::string(latren::version_string()));
  app.require_subcommand(1);

  std::string run_config, validate_config, out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario and write manifest.json plus CSV tables");
  run->add_option("config", run_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory (default: runs/<scenario>)");
  auto* validate = app.add_subcommand("validate", "Check a scenario config without running it");
  validate->add_option("config", validate_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*validate) {
      const auto cfg = latren::load_scenario(validate_config);
      std::cout << "ok: " << cfg.name << " (config sha256 " << cfg.config_sha256 << ")\n";
      return 0;
    }
    auto cfg = latren::load_scenario(run_config);
    if (seed) cfg.seed = *seed;
    const std::string dir = out_dir.empty() ? "runs/" + cfg.name : out_dir;
    const int rc = latren::run_to_directory(cfg, dir);
    std::cout << cfg.name << ": " << (rc == 0 ? "all checks passed" : "assertion failure") << " (" << dir
              << "/manifest.json)\n";
    for (const auto& c : latren::read_json(std::filesystem::path(dir) / "manifest.json").at("checks"))
      if (!c.at("passed").get<bool>())
        std::cout << "  failed: " << c.at("name").get<std::string>() << " value " << c.at("value").dump()
                  << " threshold " << c.at("threshold").dump() << "\n";
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
