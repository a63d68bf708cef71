#include "poe/config.hpp"

#include <cstdlib>
#include <fstream>

#include "poe/cached_backend.hpp"
#include "poe/errors.hpp"
#include "poe/http_backend.hpp"
#include "poe/mock_backend.hpp"

namespace poe {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json backend_defaults() {
  return {{"kind", "mock"},   {"script", nullptr},    {"seed", 0},
          {"base_url", ""},   {"model", ""},          {"api_key", ""},
          {"timeout_s", 60},  {"max_attempts", 3},    {"cache", nullptr}};
}

void reject_unknown(const ordered_json& user, const ordered_json& schema, const std::string& at) {
  if (!user.is_object() || !schema.is_object() || schema.empty()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string path = at.empty() ? key : at + "." + key;
    if (!schema.contains(key)) throw ConfigError("unknown config field '" + path + "'");
    if (key == "generation_backend" && at.empty()) {
      reject_unknown(value, backend_defaults(), path);
    } else {
      reject_unknown(value, schema.at(key), path);
    }
  }
}

void merge_into(ordered_json& base, const ordered_json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (base.contains(key) && base[key].is_object() && !base[key].empty() && value.is_object()) {
      merge_into(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

std::string expand(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto open = text.find("${", pos);
    if (open == std::string::npos) return out + text.substr(pos);
    const auto close = text.find('}', open);
    if (close == std::string::npos) {
      throw ConfigError("unterminated ${...} in config value '" + text + "'");
    }
    out += text.substr(pos, open - pos);
    const std::string body = text.substr(open + 2, close - open - 2);
    const auto sep = body.find(":-");
    const std::string var = body.substr(0, sep);
    if (const char* env = std::getenv(var.c_str())) {
      out += env;
    } else if (sep != std::string::npos) {
      out += body.substr(sep + 2);
    } else {
      throw ConfigError("environment variable '" + var + "' is not set");
    }
    pos = close + 1;
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<std::filesystem::path> optional_path(const ordered_json& v,
                                                   const std::filesystem::path& base) {
  if (v.is_null()) return std::nullopt;
  return resolve(base, v.get<std::string>());
}

TaskSpec parse_task(const ordered_json& t, const std::filesystem::path& base, const std::string& at) {
  if (!t.is_object()) throw ConfigError(at + " must be an object");
  for (const auto& [key, value] : t.items()) {
    if (key != "name" && key != "path" && key != "format" && key != "label_map" &&
        key != "split" && key != "subtask") {
      throw ConfigError("unknown config field '" + at + "." + key + "'");
    }
  }
  if (!t.contains("name") || !t.contains("path")) {
    throw ConfigError(at + " needs 'name' and 'path'");
  }
  TaskSpec spec;
  spec.name = t.at("name").get<std::string>();
  spec.path = resolve(base, t.at("path").get<std::string>());
  spec.format = parse_task_format(t.value("format", std::string("jsonl")));
  spec.split = parse_split(t.value("split", std::string("test")));
  spec.subtask = t.value("subtask", std::string());
  if (t.contains("label_map") && !t.at("label_map").is_null()) {
    std::vector<std::pair<std::string, std::string>> map;
    for (const auto& [label, text] : t.at("label_map").items()) {
      map.emplace_back(label, text.get<std::string>());
    }
    if (map.size() < 2) throw ConfigError(at + ".label_map needs at least 2 labels");
    spec.label_map = std::move(map);
  }
  if (!std::filesystem::exists(spec.path)) {
    throw ConfigError(at + ": task file '" + spec.path.string() + "' does not exist");
  }
  return spec;
}

BackendSpec parse_backend(const ordered_json& b, const std::filesystem::path& base) {
  BackendSpec spec;
  spec.kind = b.at("kind").get<std::string>();
  if (spec.kind != "mock" && spec.kind != "http") {
    throw ConfigError("backend kind must be mock or http, got '" + spec.kind + "'");
  }
  spec.script = optional_path(b.at("script"), base);
  spec.seed = b.at("seed").get<std::uint64_t>();
  spec.base_url = b.at("base_url").get<std::string>();
  spec.model = b.at("model").get<std::string>();
  spec.api_key = b.at("api_key").get<std::string>();
  spec.timeout_s = b.at("timeout_s").get<int>();
  spec.max_attempts = b.at("max_attempts").get<int>();
  spec.cache = optional_path(b.at("cache"), base);
  if (spec.kind == "http" && (spec.base_url.empty() || spec.model.empty())) {
    throw ConfigError("http backend needs base_url and model");
  }
  if (spec.timeout_s <= 0 || spec.max_attempts <= 0) {
    throw ConfigError("backend timeout_s and max_attempts must be positive");
  }
  return spec;
}

}  // namespace

ordered_json default_config_document() {
  return {
      {"tasks", ordered_json::array()},
      {"methods", {"lm", "avg", "calibration", "channel", "mcp", "poe"}},
      {"seeds", {0, 1, 2, 3, 4}},
      {"sample", {{"n", 100}, {"seed", 0}, {"per_seed", true}}},
      {"fewshot", {{"k", 0}, {"pools", ordered_json::object()}}},
      {"backend", backend_defaults()},
      {"generation_backend", nullptr},
      {"generation", {{"max_tokens", 64}, {"temperature", 0.0}}},
      {"sweep",
       {{"scorers", {"calibration", "channel", "lm", "mcp"}},
        {"strategies", {"below_average", "lowest"}}}},
      {"jobs", 1},
      {"out_dir", "out"},
      {"trace", false},
      {"dump_canonical", false},
  };
}

void interpolate_env(ordered_json& doc) {
  if (doc.is_string()) {
    doc = expand(doc.get<std::string>());
  } else if (doc.is_structured()) {
    for (auto& child : doc) interpolate_env(child);
  }
}

void apply_override(ordered_json& doc, const std::string& dotted_path, const std::string& value) {
  ordered_json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot - start);
    if (node->is_object() && node->contains(key)) {
      node = &(*node)[key];
    } else if (node->is_array() && !key.empty() &&
               key.find_first_not_of("0123456789") == std::string::npos &&
               std::stoul(key) < node->size()) {
      node = &(*node)[std::stoul(key)];
    } else {
      throw ConfigError("override '" + dotted_path + "' does not name a declared field");
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_string()) {
    *node = value;
    return;
  }
  try {
    *node = ordered_json::parse(value);
  } catch (const ordered_json::exception&) {
    *node = value;
  }
}

ordered_json load_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  ordered_json user;
  try {
    user = ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!user.is_object()) throw ConfigError("config top level must be an object");
  ordered_json doc = default_config_document();
  reject_unknown(user, doc, "");
  if (user.contains("generation_backend") && user.at("generation_backend").is_object()) {
    ordered_json gen = backend_defaults();
    merge_into(gen, user.at("generation_backend"));
    user["generation_backend"] = gen;
  }
  merge_into(doc, user);
  interpolate_env(doc);
  return doc;
}

AppConfig parse_config(const ordered_json& doc, const std::filesystem::path& base_dir) {
  try {
    reject_unknown(doc, default_config_document(), "");
    AppConfig config;
    RunConfig& run = config.run;
    const auto& tasks = doc.at("tasks");
    if (!tasks.is_array()) throw ConfigError("'tasks' must be an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      run.tasks.push_back(parse_task(tasks[i], base_dir, "tasks." + std::to_string(i)));
    }
    for (const auto& m : doc.at("methods")) run.methods.push_back(parse_method(m.get<std::string>()));
    run.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    run.sample.n = doc.at("sample").at("n").get<std::size_t>();
    run.sample.seed = doc.at("sample").at("seed").get<std::uint64_t>();
    run.per_seed_sampling = doc.at("sample").at("per_seed").get<bool>();
    run.fewshot_k = doc.at("fewshot").at("k").get<std::size_t>();
    for (const auto& [name, pool] : doc.at("fewshot").at("pools").items()) {
      ordered_json entry = pool;
      entry["name"] = name;
      run.demo_pools[name] = parse_task(entry, base_dir, "fewshot.pools." + name);
    }
    const auto jobs = doc.at("jobs").get<long long>();
    if (jobs <= 0) throw ConfigError("jobs must be positive");
    run.jobs = static_cast<std::size_t>(jobs);

    const int max_tokens = doc.at("generation").at("max_tokens").get<int>();
    const double temperature = doc.at("generation").at("temperature").get<double>();
    if (max_tokens < 1 || temperature < 0) {
      throw ConfigError("generation needs max_tokens >= 1 and temperature >= 0");
    }
    for (auto& method : run.methods) {
      method.poe.max_tokens = max_tokens;
      method.poe.temperature = temperature;
    }

    config.backend = parse_backend(doc.at("backend"), base_dir);
    if (!doc.at("generation_backend").is_null()) {
      config.generation_backend = parse_backend(doc.at("generation_backend"), base_dir);
    }
    for (const auto& s : doc.at("sweep").at("scorers")) {
      config.sweep_scorers.push_back(parse_scorer_kind(s.get<std::string>()));
    }
    for (const auto& s : doc.at("sweep").at("strategies")) {
      config.sweep_strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    config.out_dir = doc.at("out_dir").get<std::string>();
    config.trace = doc.at("trace").get<bool>();
    config.dump_canonical = doc.at("dump_canonical").get<bool>();
    validate(run);
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
  }
}

std::shared_ptr<Backend> make_backend(const BackendSpec& spec) {
  std::shared_ptr<Backend> backend;
  if (spec.kind == "mock") {
    if (spec.script) {
      auto mock = std::make_shared<MockBackend>(MockBackend::from_script_file(*spec.script));
      backend = mock;
    } else {
      backend = std::make_shared<MockBackend>(spec.seed);
    }
  } else {
    HttpBackendConfig http;
    http.base_url = spec.base_url;
    http.model = spec.model;
    http.api_key = spec.api_key;
    http.timeout = std::chrono::seconds(spec.timeout_s);
    http.max_attempts = spec.max_attempts;
    backend = std::make_shared<HttpBackend>(http);
  }
  if (spec.cache) backend = std::make_shared<CachedBackend>(backend, *spec.cache);
  return backend;
}

}  // namespace poe
