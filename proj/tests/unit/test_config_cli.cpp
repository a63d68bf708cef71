#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "poe/cli.hpp"
#include "poe/config.hpp"
#include "poe/errors.hpp"
#include "support/fixtures.hpp"

using namespace poe;
namespace t = poe::testing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_poe(std::vector<std::string> args) {
  args.insert(args.begin(), "poe");
  std::ostringstream out, err;
  const int code = poe::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& file) { return (t::test_dir() / "data" / file).string(); }

fs::path write_config(const std::string& dir_name, const std::string& body) {
  const auto dir = t::fresh_temp_dir(dir_name);
  fs::copy_file(data("fixture_task.jsonl"), dir / "fixture_task.jsonl");
  std::ofstream(dir / "config.json") << body;
  return dir / "config.json";
}

}  // namespace

TEST_CASE("config defaults fill undeclared fields") {
  const auto path = write_config("cfg_defaults", R"({"tasks": [{"name": "LD", "path": "fixture_task.jsonl"}]})");
  const auto doc = load_config_document(path);
  const AppConfig config = parse_config(doc, path.parent_path());
  CHECK(config.run.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
  CHECK(config.run.sample.n == 100);
  CHECK(config.run.methods.size() == 6);
  CHECK(config.run.tasks[0].path == path.parent_path() / "fixture_task.jsonl");
  CHECK(config.sweep_scorers.size() == 4);
  CHECK(config.sweep_strategies.size() == 2);
  CHECK(config.backend.kind == "mock");
}

TEST_CASE("unknown config keys are rejected") {
  const auto path = write_config("cfg_unknown",
                                 R"({"tasks": [], "sample": {"n": 5, "size": 3}})");
  CHECK_THROWS_AS(load_config_document(path), ConfigError);
  const auto top = write_config("cfg_unknown_top", R"({"epochs": 3})");
  CHECK_THROWS_AS(load_config_document(top), ConfigError);
}

TEST_CASE("environment interpolation") {
  ::setenv("POE_TEST_MODEL", "tiny", 1);
  ::unsetenv("POE_TEST_UNSET");
  nlohmann::ordered_json doc = {{"a", "${POE_TEST_MODEL}-x"},
                                {"b", "${POE_TEST_UNSET:-fallback}"},
                                {"c", {"${POE_TEST_MODEL}"}}};
  interpolate_env(doc);
  CHECK(doc["a"] == "tiny-x");
  CHECK(doc["b"] == "fallback");
  CHECK(doc["c"][0] == "tiny");
  nlohmann::ordered_json missing = {{"a", "${POE_TEST_UNSET}"}};
  CHECK_THROWS_AS(interpolate_env(missing), ConfigError);
}

TEST_CASE("overrides address declared fields only") {
  auto doc = default_config_document();
  apply_override(doc, "sample.n", "7");
  apply_override(doc, "backend.model", "123");
  apply_override(doc, "seeds", "[9]");
  CHECK(doc["sample"]["n"] == 7);
  CHECK(doc["backend"]["model"] == "123");
  CHECK(doc["seeds"] == nlohmann::ordered_json::array({9}));
  CHECK_THROWS_AS(apply_override(doc, "sample.size", "3"), ConfigError);
}

TEST_CASE("cli: missing config file exits with the config code") {
  const auto r = run_poe({"run", "--config", "/nonexistent/config.json"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("config error") != std::string::npos);
  CHECK(run_poe({"run"}).code == cli::kExitConfig);
  CHECK(run_poe({"bogus"}).code == cli::kExitConfig);
}

TEST_CASE("cli: validate and run share the parser") {
  const auto path = write_config("cli_parity", R"({"tasks": [{"name": "LD", "path": "fixture_task.jsonl"}],
    "methods": ["mcp", "nonsense"]})");
  const auto v = run_poe({"validate", "--config", path.string()});
  const auto r = run_poe({"run", "--config", path.string()});
  CHECK(v.code == cli::kExitConfig);
  CHECK(r.code == cli::kExitConfig);
  CHECK(v.err == r.err);

  const auto ok = run_poe({"validate", "--config", data("fixture_config.json")});
  CHECK(ok.code == cli::kExitOk);
  CHECK(ok.out == "config ok: 1 task(s), 7 method(s), 3 seed(s)\n");
}

TEST_CASE("cli: malformed data is a config-class error in validate and run") {
  const auto path = write_config("cli_baddata", R"({"tasks": [{"name": "LD", "path": "fixture_task.jsonl"}]})");
  std::ofstream(path.parent_path() / "fixture_task.jsonl", std::ios::app) << "{broken\n";
  CHECK(run_poe({"validate", "--config", path.string()}).code == cli::kExitConfig);
  CHECK(run_poe({"run", "--config", path.string()}).code == cli::kExitConfig);
}

TEST_CASE("cli: flags override the config") {
  const auto out = t::fresh_temp_dir("cli_seeds");
  const auto r = run_poe({"run", "--config", data("fixture_config.json"), "--seeds", "4,5",
                      "--methods", "lm,poe", "--n", "3", "--out-dir", out.string()});
  REQUIRE(r.code == cli::kExitOk);
  const std::string csv = t::read_file(out / "results.csv");
  CHECK(csv.rfind("task,method,mean,std,seed_4,seed_5\nLD,lm,", 0) == 0);
  CHECK(fs::exists(out / "masking.csv"));
  CHECK(fs::exists(out / "report.md"));
  CHECK(r.out.find("| LD |") != std::string::npos);
  CHECK(r.out.find("3 instances per seed") != std::string::npos);

  CHECK(run_poe({"run", "--config", data("fixture_config.json"), "--seeds", "x"}).code ==
        cli::kExitConfig);
  CHECK(run_poe({"run", "--config", data("fixture_config.json"), "--set", "sample.bogus=1"}).code ==
        cli::kExitConfig);
}

TEST_CASE("cli: run on the fixture reproduces the pinned results") {
  const auto out = t::fresh_temp_dir("cli_golden");
  const auto r = run_poe({"run", "--config", data("fixture_config.json"), "--out-dir", out.string(),
                      "--trace", "--dump-canonical"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(t::read_file(out / "results.csv") ==
        t::read_file(t::test_dir() / "golden" / "fixture_results.csv"));
  CHECK(fs::exists(out / "LD.canonical.jsonl"));

  std::ifstream traces(out / "traces.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(traces, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("prediction"));
    CHECK(j.contains("correct"));
    ++lines;
  }
  CHECK(lines == 7 * 3 * 8);
}

TEST_CASE("cli: trace prints the two-step record") {
  const auto r = run_poe({"trace", "--config", data("siqa_sample.config.json"), "--id", "siqa-kendall"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["method"] == "poe");
  CHECK(j["step1_scores"]["values"].size() == 3);
  CHECK(j["mask"].size() == 3);
  CHECK(j["step2_scores"]["values"].size() == 3);
  CHECK(j["step1_prompts"].size() == 3);
  CHECK(j["step2_prompts"][0]["context"].get<std::string>().rfind(
            "Select the most suitable option", 0) == 0);
  for (std::size_t i = 0; i < 3; ++i) {
    if (j["mask"][i] == 0) CHECK(j["step2_scores"]["values"][i] == "eliminated");
  }

  const auto mcp = run_poe({"trace", "--config", data("siqa_sample.config.json"), "--id",
                            "siqa-kendall", "--method", "mcp"});
  REQUIRE(mcp.code == cli::kExitOk);
  const auto m = nlohmann::json::parse(mcp.out);
  CHECK(m["final_scores"]["values"].size() == 3);
  CHECK_FALSE(m.contains("mask"));
  CHECK_FALSE(m.contains("step2_scores"));

  const auto unknown =
      run_poe({"trace", "--config", data("siqa_sample.config.json"), "--id", "no-such-id"});
  CHECK(unknown.code == cli::kExitConfig);
}

TEST_CASE("cli: unreachable http backend exits with the backend code") {
  const auto out = t::fresh_temp_dir("cli_http");
  const auto r = run_poe({"run", "--config", data("siqa_sample.config.json"), "--backend-url",
                      "http://127.0.0.1:1", "--model", "m", "--set", "backend.max_attempts=1",
                      "--set", "backend.timeout_s=1", "--out-dir", out.string()});
  CHECK(r.code == cli::kExitBackend);
}

TEST_CASE("cli: render writes the worked-example prompts") {
  const auto dir = t::fresh_temp_dir("cli_render");
  const auto r = run_poe({"render", "--config", data("siqa_sample.config.json"), "--id", "siqa-kendall",
                      "--mask", "0,1,1", "--dir", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(t::test_dir() / "golden" / "siqa_prompts")) {
    INFO(entry.path().filename().string());
    CHECK(t::read_file(dir / entry.path().filename()) == t::read_file(entry.path()));
    ++compared;
  }
  CHECK(compared == 48);
  CHECK(run_poe({"render", "--config", data("siqa_sample.config.json"), "--id", "siqa-kendall",
             "--mask", "0,0,0", "--dir", dir.string()})
            .code == cli::kExitConfig);
}
