#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "latren/error.hpp"
#include "latren/io.hpp"
#include "latren/scenario.hpp"

using namespace latren;
namespace fs = std::filesystem;

namespace {
fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("latren_test_" + name);
  fs::remove_all(d);
  return d;
}

Errc code_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}
}  // namespace

TEST_CASE("checked-in configs validate") {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(LATREN_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const auto cfg = load_scenario(e.path());
    CHECK(std::find(scenario_names().begin(), scenario_names().end(), cfg.name) != scenario_names().end());
    CHECK(cfg.config_sha256.size() == 64);
    ++n;
  }
  CHECK(n >= scenario_names().size());
}

TEST_CASE("schema errors") {
  CHECK(code_of(R"({"scenario": "nope"})") == Errc::ConfigError);
  CHECK(code_of(R"({"scenario": "srt", "params": {"bogus": 1}})") == Errc::ConfigError);
  CHECK(code_of(R"({"scenario": "srt", "params": {"n_hi": "many"}})") == Errc::ConfigError);
  CHECK(code_of(R"({"scenario": "srt", "extra": 1})") == Errc::ConfigError);
  CHECK(code_of(R"({"scenario": "srt", "seed": -3})") == Errc::ConfigError);
  CHECK(code_of("not json") == Errc::ConfigError);
  CHECK_NOTHROW(parse_scenario(R"({"scenario": "srt", "seed": 4, "params": {"alpha": 0.7}})"));
}

TEST_CASE("point mass kernel: ratio column identically 1") {
  const auto cfg = parse_scenario(
      R"({"scenario": "blackwell", "params": {"law": {"span_h": 1.0, "atoms": [[1, 1.0]]}, "n_hi": 50, "band_from": 1, "band_to": 50}})");
  const auto out = run_scenario(cfg);
  CHECK(out.all_passed());
  const auto& [name, table] = out.tables.front();
  CHECK(name == "convergence");
  std::istringstream csv(table.to_csv());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,u,normalizer,ratio,trunc_error");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    const auto a = line.find(',', line.find(',', line.find(',') + 1) + 1);
    CHECK(line.substr(a + 1, line.find(',', a + 1) - a - 1) == "1");
    ++rows;
  }
  CHECK(rows == 50);
}

TEST_CASE("assertion failures give exit status 2") {
  const auto cfg = parse_scenario(
      R"({"scenario": "blackwell", "params": {"n_hi": 20, "band_from": 1, "band_to": 20, "ratio_tol": 1e-6}})");
  const auto dir = fresh_dir("fail");
  CHECK(run_to_directory(cfg, dir) == 2);
  const auto m = read_json(dir / "manifest.json");
  CHECK(m.at("status") == "fail");
}

TEST_CASE("module errors carry the scenario name") {
  const auto cfg = parse_scenario(R"({"scenario": "srt", "params": {"law": {"span_h": 1.0, "atoms": [[1, 1.0]]}}})");
  try {
    run_scenario(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("srt") != std::string::npos);
  }
}

TEST_CASE("reruns reproduce CSV bodies byte for byte") {
  const std::string text =
      R"({"scenario": "mc-perpetuity", "seed": 21, "params": {"samples": 20000, "write_samples": true}})";
  const auto cfg = parse_scenario(text);
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  CHECK(run_to_directory(cfg, a) == 0);
  CHECK(run_to_directory(cfg, b) == 0);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    CHECK(read_text(e.path()) == read_text(b / e.path().filename()));
    ++compared;
  }
  CHECK(compared >= 3);
  const auto m = read_json(a / "manifest.json");
  CHECK(m.at("config_sha256") == sha256_hex(text));
  CHECK(m.at("seed") == 21);
  CHECK(m.contains("created_utc"));
  CHECK(m.at("version") == version_string());
  const auto samples = read_samples(a / "samples_perpetuity.bin");
  CHECK(samples.size() == 20000);
  CHECK(samples == read_samples(b / "samples_perpetuity.bin"));
}

TEST_CASE("qset round trip and constant-q scenarios") {
  const auto rt = run_scenario(parse_scenario(
      R"({"scenario": "qset-roundtrip", "params": {"target": {"rows": [[1, 0.5], [1.5, 0.6, 0.7], [2, 0.78]], "scale_c": 0.25}}})"));
  CHECK(rt.all_passed());
  const auto cq = run_scenario(parse_scenario(R"({"scenario": "constant-q", "params": {"p": 0.1}})"));
  CHECK(cq.all_passed());
}
