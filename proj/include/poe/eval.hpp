#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poe/backend.hpp"
#include "poe/core.hpp"
#include "poe/datasets.hpp"
#include "poe/elimination.hpp"
#include "poe/scorers.hpp"

namespace poe {

// A row of the results table: a baseline scorer, a PoE configuration, or
// the generation-based MCP baseline.
struct Method {
  enum class Kind { baseline, poe, mcp_prompting };
  Kind kind = Kind::baseline;
  ScorerKind scorer = ScorerKind::mcp;  // baseline only
  PoEConfig poe;                        // poe only

  bool is_poe() const { return kind == Kind::poe; }
  bool uses_generation() const {
    return kind == Kind::mcp_prompting ||
           (kind == Kind::poe && poe.step2_mode == Step2Mode::masked_prompting);
  }
};

// Names: lm | avg | calibration | channel | mcp | mcp-prompting | poe
// (= poe:mcp:below_average) | poe-prompting | poe:<scorer>:<strategy>[:prompting].
Method parse_method(std::string_view name);
// Canonical name; parse_method(method_name(m)) round-trips.
std::string method_name(const Method& method);

// Backends for one run. `generation` serves prompting-mode step 2 and may be
// the same object as `scoring`.
struct Backends {
  Backend& scoring;
  Backend& generation;
};

// Predicts one instance. Every path fills Prediction::trace (baselines
// without an elimination).
Prediction predict(const Method& method, const Instance& instance, const Backends& backends);

// Fraction of predictions whose chosen index is the gold index; a missing
// chosen index counts as wrong. Throws InvalidInput on empty or misaligned input.
double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<Instance>& instances);

// Fraction of instances whose gold option survived elimination. Throws
// InvalidInput when a prediction has no elimination trace.
double masking_accuracy(const std::vector<Prediction>& predictions,
                        const std::vector<Instance>& instances);

double mean(const std::vector<double>& values);
// Population standard deviation (divides by N).
double population_std(const std::vector<double>& values);

struct RunConfig {
  std::vector<TaskSpec> tasks;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  SampleSpec sample;  // sample.seed is used only when per_seed_sampling is false
  bool per_seed_sampling = true;
  std::size_t fewshot_k = 0;
  // Demonstration pools by task name. Tasks without an entry draw
  // demonstrations from their own file and evaluate on the remainder.
  std::map<std::string, TaskSpec> demo_pools;
  std::size_t jobs = 1;
  bool keep_traces = false;
};

// Throws ConfigError when tasks, methods or seeds are empty, n or jobs is 0,
// or a method name repeats.
void validate(const RunConfig& config);

struct CellStats {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> per_seed;
  std::size_t failures = 0;      // instances that errored (scored incorrect)
  std::size_t inconsistent = 0;  // prompting picks of an eliminated option
  std::size_t extraction_failures = 0;
};

using CellKey = std::pair<std::string, std::string>;  // (task, method)

struct InstanceRecord {
  std::string task;
  std::string method;
  std::uint64_t seed = 0;
  std::string instance_id;
  std::size_t gold_index = 0;
  std::optional<Prediction> prediction;  // empty on failure
  std::string error;
};

struct EvalReport {
  std::vector<std::string> tasks;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::map<CellKey, CellStats> cells;       // accuracy
  std::map<CellKey, CellStats> mask_cells;  // masking accuracy, PoE methods only
  std::map<std::string, double> gaps;       // task -> poe mean - mcp mean
  std::map<std::string, LoadStats> load_stats;
  std::map<std::string, std::size_t> evaluated;  // task -> instances per seed
  std::vector<std::string> warnings;
  std::vector<InstanceRecord> records;  // filled when keep_traces

  // Cells where accuracy exceeds masking accuracy (masked-scoring PoE only).
  std::vector<std::string> containment_violations() const;
};

// Samples, predicts and aggregates every (task, method, seed). Per-instance
// errors are recorded and scored incorrect; CapabilityError aborts, and a
// cell where every instance fails with TransportError raises
// SystemicBackendFailure. Aggregation follows canonical instance order, so
// `jobs` never changes the result.
EvalReport run_grid(const RunConfig& config, const Backends& backends);

struct SweepRow {
  ScorerKind scorer;
  EliminationStrategy strategy;
  double acc_mask = 0.0;  // mean over tasks of per-task seed means
  double acc = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  EvalReport report;
};

// Runs masked-scoring PoE for every (scorer, strategy) pair over
// config.tasks/seeds (config.methods is ignored).
SweepResult sweep_configurations(const RunConfig& config, const std::vector<ScorerKind>& scorers,
                                 const std::vector<EliminationStrategy>& strategies,
                                 const Backends& backends);

}  // namespace poe
