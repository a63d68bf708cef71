#include "poe/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "poe/errors.hpp"

namespace poe {

using ordered_json = nlohmann::ordered_json;

const char* to_string(TaskFormat format) {
  switch (format) {
    case TaskFormat::jsonl: return "jsonl";
    case TaskFormat::bigbench_json: return "bigbench_json";
  }
  return "unknown";
}

const char* to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "unknown";
}

TaskFormat parse_task_format(std::string_view name) {
  if (name == "jsonl") return TaskFormat::jsonl;
  if (name == "bigbench_json") return TaskFormat::bigbench_json;
  throw ConfigError("unknown task format '" + std::string(name) +
                    "' (expected jsonl|bigbench_json)");
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train|dev|test)");
}

namespace {

std::string scalar_to_string(const ordered_json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  return value.dump();
}

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw DataError(where + ": " + what);
}

void check_instance(const Instance& instance, const std::string& where) {
  try {
    validate(instance);
  } catch (const InvalidInput& e) {
    malformed(where, e.what());
  }
}

// Returns nullopt when the record has no usable gold.
std::optional<Instance> parse_jsonl_record(const ordered_json& record, const TaskSpec& spec,
                                           const std::string& where, std::size_t line_no) {
  if (!record.is_object()) malformed(where, "record is not a JSON object");

  Instance instance;
  instance.task_name = spec.name;
  instance.id = record.contains("id") ? scalar_to_string(record.at("id"))
                                      : spec.name + "-" + std::to_string(line_no);

  if (record.contains("question") && record.at("question").is_string()) {
    instance.question = record.at("question").get<std::string>();
  } else if (record.contains("premise") && record.contains("hypothesis") &&
             record.at("premise").is_string() && record.at("hypothesis").is_string()) {
    instance.question =
        record.at("premise").get<std::string>() + "\n" + record.at("hypothesis").get<std::string>();
  } else {
    malformed(where, "missing string field 'question'");
  }

  if (spec.label_map) {
    for (const auto& [label, text] : *spec.label_map) instance.options.push_back(text);
    if (!record.contains("label") || record.at("label").is_null()) return std::nullopt;
    const std::string label = scalar_to_string(record.at("label"));
    const auto& map = *spec.label_map;
    auto it = std::find_if(map.begin(), map.end(), [&](const auto& kv) { return kv.first == label; });
    if (it == map.end()) malformed(where, "label '" + label + "' is not in the label map");
    instance.gold_index = static_cast<std::size_t>(it - map.begin());
  } else {
    if (!record.contains("options") || !record.at("options").is_array()) {
      malformed(where, "missing array field 'options'");
    }
    for (const auto& option : record.at("options")) {
      if (!option.is_string()) malformed(where, "option is not a string");
      instance.options.push_back(option.get<std::string>());
    }
    if (!record.contains("gold_index") || record.at("gold_index").is_null()) return std::nullopt;
    const auto& gold = record.at("gold_index");
    if (!gold.is_number_integer() || gold.get<long long>() < 0) {
      malformed(where, "gold_index must be a non-negative integer");
    }
    instance.gold_index = gold.get<std::size_t>();
  }
  check_instance(instance, where);
  return instance;
}

std::optional<Instance> parse_bigbench_example(const ordered_json& example, const TaskSpec& spec,
                                               const std::string& id, const std::string& where) {
  if (!example.is_object()) malformed(where, "example is not a JSON object");
  if (!example.contains("input") || !example.at("input").is_string()) {
    malformed(where, "missing string field 'input'");
  }
  if (!example.contains("target_scores") || !example.at("target_scores").is_object()) {
    malformed(where, "missing object field 'target_scores' (not a multiple-choice example)");
  }
  Instance instance;
  instance.task_name = spec.name;
  instance.id = example.contains("id") ? scalar_to_string(example.at("id")) : id;
  instance.question = example.at("input").get<std::string>();

  std::vector<std::size_t> correct;
  for (const auto& [option, score] : example.at("target_scores").items()) {
    if (!score.is_number()) malformed(where, "target score for '" + option + "' is not a number");
    if (score.get<double>() > 0.5) correct.push_back(instance.options.size());
    instance.options.push_back(option);
  }
  if (correct.size() != 1) return std::nullopt;
  instance.gold_index = correct.front();
  check_instance(instance, where);
  return instance;
}

void drop_deviating_option_counts(LoadedTask& task) {
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& instance : task.instances) ++histogram[instance.option_count()];
  if (histogram.empty()) return;
  std::size_t modal = 0;
  std::size_t modal_freq = 0;
  for (const auto& [count, freq] : histogram) {
    if (freq >= modal_freq) {  // ascending keys: ties resolve to the larger count
      modal = count;
      modal_freq = freq;
    }
  }
  task.stats.modal_option_count = modal;
  const auto before = task.instances.size();
  std::erase_if(task.instances, [&](const Instance& i) { return i.option_count() != modal; });
  task.stats.dropped_option_count = before - task.instances.size();
}

LoadedTask load_jsonl(const TaskSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw DataError("cannot open task file '" + spec.path.string() + "'");
  LoadedTask task;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = spec.path.string() + ":" + std::to_string(line_no);
    ordered_json record;
    try {
      record = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
      malformed(where, std::string("invalid JSON: ") + e.what());
    }
    if (!spec.subtask.empty() && record.is_object() &&
        record.value("subtask", std::string()) != spec.subtask) {
      continue;
    }
    ++task.stats.records;
    if (auto instance = parse_jsonl_record(record, spec, where, line_no)) {
      task.instances.push_back(std::move(*instance));
    } else {
      ++task.stats.skipped_missing_gold;
    }
  }
  return task;
}

LoadedTask load_bigbench(const TaskSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw DataError("cannot open task file '" + spec.path.string() + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    malformed(spec.path.string(), std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed(spec.path.string(), "top level is not an object");

  // (subtask name, examples) groups
  std::vector<std::pair<std::string, const ordered_json*>> groups;
  if (doc.contains("subtasks") && doc.at("subtasks").is_array()) {
    for (const auto& sub : doc.at("subtasks")) {
      const std::string name = sub.value("name", std::string());
      if (!spec.subtask.empty() && name != spec.subtask) continue;
      if (!sub.contains("examples") || !sub.at("examples").is_array()) {
        malformed(spec.path.string(), "subtask '" + name + "' has no examples array");
      }
      groups.emplace_back(name, &sub.at("examples"));
    }
  } else if (doc.contains("examples") && doc.at("examples").is_array()) {
    groups.emplace_back("", &doc.at("examples"));
  } else {
    malformed(spec.path.string(), "no 'examples' or 'subtasks' array");
  }

  LoadedTask task;
  for (const auto& [subtask, examples] : groups) {
    const std::string prefix = spec.name + (subtask.empty() ? "" : "/" + subtask);
    for (std::size_t i = 0; i < examples->size(); ++i) {
      const std::string where = spec.path.string() + ": " +
                                (subtask.empty() ? "" : "subtask '" + subtask + "' ") +
                                "example " + std::to_string(i);
      ++task.stats.records;
      if (auto instance = parse_bigbench_example((*examples)[i], spec,
                                                 prefix + "-" + std::to_string(i), where)) {
        task.instances.push_back(std::move(*instance));
      } else {
        ++task.stats.skipped_missing_gold;
      }
    }
  }
  return task;
}

std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t range) {
  // Reject the low (2^64 mod range) values so every residue is equally likely.
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    const std::uint64_t x = engine();
    if (x >= threshold) return x % range;
  }
}

}  // namespace

LoadedTask load_task(const TaskSpec& spec) {
  LoadedTask task =
      spec.format == TaskFormat::jsonl ? load_jsonl(spec) : load_bigbench(spec);
  drop_deviating_option_counts(task);
  return task;
}

std::string canonical_jsonl(const std::vector<Instance>& instances) {
  std::string out;
  for (const auto& instance : instances) {
    ordered_json demos = ordered_json::array();
    for (const auto& demo : instance.demonstrations) {
      demos.push_back({{"question", demo.question},
                       {"options", demo.options},
                       {"gold_index", demo.gold_index}});
    }
    const ordered_json line = {{"id", instance.id},
                               {"task", instance.task_name},
                               {"question", instance.question},
                               {"options", instance.options},
                               {"gold_index", instance.gold_index},
                               {"demonstrations", demos}};
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t k,
                                        std::uint64_t seed) {
  k = std::min(k, population);
  std::vector<std::size_t> order(population);
  for (std::size_t i = 0; i < population; ++i) order[i] = i;
  std::mt19937_64 engine(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(bounded(engine, population - i));
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  return order;
}

SampleResult sample_instances(const std::vector<Instance>& instances, const SampleSpec& spec) {
  SampleResult result;
  if (spec.n >= instances.size()) {
    result.truncated = spec.n > instances.size();
    result.instances = instances;
    return result;
  }
  auto picked = sample_indices(instances.size(), spec.n, spec.seed);
  std::sort(picked.begin(), picked.end());
  result.instances.reserve(picked.size());
  for (auto i : picked) result.instances.push_back(instances[i]);
  return result;
}

FewShotDraw build_fewshot(const std::vector<Instance>& pool, std::size_t k, std::uint64_t seed) {
  if (pool.size() < k) {
    throw InvalidInput("few-shot pool has " + std::to_string(pool.size()) +
                       " instances, need " + std::to_string(k));
  }
  FewShotDraw draw;
  for (auto i : sample_indices(pool.size(), k, seed)) {
    const Instance& source = pool[i];
    draw.demonstrations.push_back({source.question, source.options, source.gold_index});
    draw.demo_ids.push_back(source.id);
  }
  return draw;
}

std::vector<Instance> exclude_ids(const std::vector<Instance>& instances,
                                  const std::vector<std::string>& ids) {
  const std::set<std::string> excluded(ids.begin(), ids.end());
  std::vector<Instance> out;
  for (const auto& instance : instances) {
    if (!excluded.count(instance.id)) out.push_back(instance);
  }
  return out;
}

std::vector<Instance> with_demonstrations(std::vector<Instance> instances,
                                          const std::vector<Demonstration>& demos) {
  for (auto& instance : instances) instance.demonstrations = demos;
  return instances;
}

}  // namespace poe
