#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poe/backend.hpp"
#include "poe/eval.hpp"

namespace poe {

struct BackendSpec {
  std::string kind = "mock";  // mock | http
  // mock
  std::optional<std::filesystem::path> script;
  std::uint64_t seed = 0;
  // http
  std::string base_url;
  std::string model;
  std::string api_key;
  int timeout_s = 60;
  int max_attempts = 3;
  // any
  std::optional<std::filesystem::path> cache;
};

struct AppConfig {
  RunConfig run;
  BackendSpec backend;
  std::optional<BackendSpec> generation_backend;  // defaults to `backend`
  std::vector<ScorerKind> sweep_scorers;
  std::vector<EliminationStrategy> sweep_strategies;
  std::filesystem::path out_dir = "out";
  bool trace = false;
  bool dump_canonical = false;
};

// Every declared field with its default. Config files may only use these keys
// (plus free-form entries under "tasks", "fewshot.pools" and label maps).
nlohmann::ordered_json default_config_document();

// Replaces ${VAR} and ${VAR:-fallback} in every string value. An unset
// variable without a fallback throws ConfigError.
void interpolate_env(nlohmann::ordered_json& doc);

// Sets the field at a dotted path (e.g. "sample.n", "backend.model"). The
// value is parsed as JSON when possible, else taken as a string. Throws
// ConfigError when the path is not a declared field.
void apply_override(nlohmann::ordered_json& doc, const std::string& dotted_path,
                    const std::string& value);

// Reads the file, rejects undeclared keys, interpolates env vars and merges
// over the defaults.
nlohmann::ordered_json load_config_document(const std::filesystem::path& path);

// Typed view. Relative task/script/cache paths resolve against base_dir.
AppConfig parse_config(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir);

std::shared_ptr<Backend> make_backend(const BackendSpec& spec);

}  // namespace poe
