#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poe/core.hpp"

namespace poe {

enum class TaskFormat { jsonl, bigbench_json };
enum class Split { train, dev, test };

const char* to_string(TaskFormat format);
const char* to_string(Split split);
TaskFormat parse_task_format(std::string_view name);
Split parse_split(std::string_view name);

struct TaskSpec {
  std::string name;
  std::filesystem::path path;
  TaskFormat format = TaskFormat::jsonl;
  // Raw label -> option text, in option order. When set, JSONL records carry
  // a "label" instead of options/gold_index and every record gets these
  // options (e.g. 0 -> entailment, 1 -> neutral, 2 -> contradiction).
  std::optional<std::vector<std::pair<std::string, std::string>>> label_map;
  Split split = Split::test;
  // Keep only records of this subtask (BIG-bench "subtasks" name or JSONL
  // "subtask" field). Empty means aggregate every subtask.
  std::string subtask;
};

struct LoadStats {
  std::size_t records = 0;
  std::size_t skipped_missing_gold = 0;
  std::size_t dropped_option_count = 0;
  std::size_t modal_option_count = 0;
};

struct LoadedTask {
  std::vector<Instance> instances;
  LoadStats stats;
};

// Parses the task file and applies ingestion rules:
//  * JSONL records: {"id", "question", "options": [..], "gold_index"}; with a
//    label_map, {"id", "question" | "premise"+"hypothesis", "label"}.
//  * BIG-bench JSON: {"examples": [{"input", "target_scores": {opt: score}}]}
//    or {"subtasks": [{"name", "examples": [..]}]}; option order follows the
//    file; the unique option scoring above 0.5 is gold (0.5 counts as wrong).
//  * Records without a usable gold are skipped and counted.
//  * Instances whose option count differs from the modal count (ties go to
//    the larger count) are dropped and counted.
// Malformed records throw DataError naming the file and line/example index.
LoadedTask load_task(const TaskSpec& spec);

// One line per instance: {"id","task","question","options","gold_index","demonstrations"}.
std::string canonical_jsonl(const std::vector<Instance>& instances);

// Portable sampler: std::mt19937_64 (bit-exact by the standard) drives a
// partial Fisher-Yates shuffle with rejection-sampled bounded integers.
inline constexpr std::string_view kSamplerName = "mt19937_64-fisher-yates-v1";

struct SampleSpec {
  std::size_t n = 100;
  std::uint64_t seed = 0;
};

struct SampleResult {
  std::vector<Instance> instances;  // original relative order preserved
  bool truncated = false;           // n exceeded the population; all were taken
};

SampleResult sample_instances(const std::vector<Instance>& instances, const SampleSpec& spec);

// Indices of a uniform draw of k from [0, population), in draw order.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t k,
                                        std::uint64_t seed);

struct FewShotDraw {
  std::vector<Demonstration> demonstrations;
  std::vector<std::string> demo_ids;
};

// Draws k demonstrations from pool. Throws InvalidInput when pool.size() < k.
FewShotDraw build_fewshot(const std::vector<Instance>& pool, std::size_t k, std::uint64_t seed);

// Instances whose id is not in `ids`, order preserved.
std::vector<Instance> exclude_ids(const std::vector<Instance>& instances,
                                  const std::vector<std::string>& ids);

// Copies of `instances` with `demos` attached.
std::vector<Instance> with_demonstrations(std::vector<Instance> instances,
                                          const std::vector<Demonstration>& demos);

}  // namespace poe
