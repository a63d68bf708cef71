#include "poe/eval.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "poe/errors.hpp"
#include "poe/mock_backend.hpp"
#include "poe/templates.hpp"

namespace poe {
namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

bool is_default_poe(const PoEConfig& c) {
  return c.step1_scorer.kind == ScorerKind::mcp &&
         c.strategy == EliminationStrategy::below_average;
}

Prediction predict_baseline(ScorerKind kind, const Instance& instance, Backend& backend) {
  Trace trace;
  trace.step1_prompts = scorer_prompts(kind, instance);
  Prediction prediction;
  prediction.final_scores = score(kind, instance, backend);
  prediction.chosen_index = prediction.final_scores.argmax();
  trace.tie_broken = prediction.final_scores.argmax_is_tied();
  prediction.trace = std::move(trace);
  return prediction;
}

Prediction predict_mcp_prompting(const Instance& instance, Backend& backend, const PoEConfig& gen) {
  const std::string prompt = mcp_context(instance);
  Trace trace;
  trace.step1_prompts.push_back({prompt, "", PromptPurpose::generation});
  std::string reply;
  try {
    reply = backend.generate({prompt, gen.max_tokens, gen.temperature});
  } catch (Error& e) {
    e.add_context("instance '" + instance.id + "'");
    throw;
  }
  trace.generation = reply;
  Prediction prediction;
  prediction.chosen_index = extract_answer(reply, instance.option_count());
  prediction.final_scores = {std::vector<Score>(instance.option_count(), Score(0.0)),
                             "extracted_answer"};
  if (prediction.chosen_index) {
    prediction.final_scores.values[*prediction.chosen_index] = Score(1.0);
  } else {
    trace.extraction_failed = true;
  }
  prediction.trace = std::move(trace);
  return prediction;
}

void require_aligned(std::size_t predictions, std::size_t instances) {
  if (predictions != instances) {
    throw InvalidInput("metric inputs misaligned: " + std::to_string(predictions) +
                       " predictions for " + std::to_string(instances) + " instances");
  }
  if (instances == 0) throw InvalidInput("metric over an empty instance set");
}

bool gold_kept(const Prediction& prediction, std::size_t gold) {
  return prediction.trace && prediction.trace->elimination &&
         prediction.trace->elimination->mask.keeps(gold);
}

struct Outcome {
  std::optional<Prediction> prediction;
  std::string error;
  bool transport_failure = false;
};

// Predicts every instance, `jobs` at a time; results are stored by index.
std::vector<Outcome> predict_all(const Method& method, const std::vector<Instance>& instances,
                                 const Backends& backends, std::size_t jobs) {
  std::vector<Outcome> outcomes(instances.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= instances.size()) return;
      {
        std::lock_guard lock(fatal_mutex);
        if (fatal) return;
      }
      try {
        outcomes[i].prediction = predict(method, instances[i], backends);
      } catch (const CapabilityError&) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      } catch (const TransportError& e) {
        outcomes[i].error = e.what();
        outcomes[i].transport_failure = true;
      } catch (const Error& e) {
        outcomes[i].error = e.what();
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, instances.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (fatal) std::rethrow_exception(fatal);
  return outcomes;
}

void finalize(CellStats& cell) {
  cell.mean = mean(cell.per_seed);
  cell.std = population_std(cell.per_seed);
}

// Demonstration draws use a stream distinct from evaluation sampling.
std::uint64_t demo_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x64656d6f73ULL); }

}  // namespace

Method parse_method(std::string_view name) {
  Method method;
  if (name == "mcp-prompting") {
    method.kind = Method::Kind::mcp_prompting;
    return method;
  }
  if (name == "poe" || name == "poe-prompting") {
    method.kind = Method::Kind::poe;
    if (name == "poe-prompting") method.poe.step2_mode = Step2Mode::masked_prompting;
    return method;
  }
  if (name.rfind("poe:", 0) == 0) {
    const auto parts = split(name, ':');
    if (parts.size() < 3 || parts.size() > 4 || (parts.size() == 4 && parts[3] != "prompting")) {
      throw ConfigError("bad PoE method '" + std::string(name) +
                        "' (expected poe:<scorer>:<strategy>[:prompting])");
    }
    method.kind = Method::Kind::poe;
    method.poe.step1_scorer.kind = parse_scorer_kind(parts[1]);
    method.poe.strategy = parse_strategy(parts[2]);
    if (parts.size() == 4) method.poe.step2_mode = Step2Mode::masked_prompting;
    return method;
  }
  try {
    method.scorer = parse_scorer_kind(name);
  } catch (const ConfigError&) {
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected lm|avg|calibration|channel|mcp|mcp-prompting|poe|"
                      "poe-prompting|poe:<scorer>:<strategy>[:prompting])");
  }
  return method;
}

std::string method_name(const Method& method) {
  switch (method.kind) {
    case Method::Kind::baseline: return to_string(method.scorer);
    case Method::Kind::mcp_prompting: return "mcp-prompting";
    case Method::Kind::poe: {
      const bool prompting = method.poe.step2_mode == Step2Mode::masked_prompting;
      if (is_default_poe(method.poe)) return prompting ? "poe-prompting" : "poe";
      return std::string("poe:") + to_string(method.poe.step1_scorer.kind) + ":" +
             to_string(method.poe.strategy) + (prompting ? ":prompting" : "");
    }
  }
  return "unknown";
}

Prediction predict(const Method& method, const Instance& instance, const Backends& backends) {
  switch (method.kind) {
    case Method::Kind::baseline:
      return predict_baseline(method.scorer, instance, backends.scoring);
    case Method::Kind::mcp_prompting:
      return predict_mcp_prompting(instance, backends.generation, method.poe);
    case Method::Kind::poe:
      if (method.poe.step2_mode == Step2Mode::masked_prompting) {
        return poe_predict_prompting(instance, backends.scoring, backends.generation, method.poe);
      }
      return poe_predict(instance, backends.scoring, method.poe);
  }
  throw InvalidInput("unknown method kind");
}

double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<Instance>& instances) {
  require_aligned(predictions.size(), instances.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (predictions[i].is_correct(instances[i].gold_index)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(instances.size());
}

double masking_accuracy(const std::vector<Prediction>& predictions,
                        const std::vector<Instance>& instances) {
  require_aligned(predictions.size(), instances.size());
  std::size_t kept = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!predictions[i].trace || !predictions[i].trace->elimination) {
      throw InvalidInput("prediction for instance '" + instances[i].id +
                         "' has no elimination trace");
    }
    if (gold_kept(predictions[i], instances[i].gold_index)) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(instances.size());
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInput("mean of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_std(const std::vector<double>& values) {
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

void validate(const RunConfig& config) {
  if (config.tasks.empty()) throw ConfigError("run config has no tasks");
  if (config.methods.empty()) throw ConfigError("run config has no methods");
  if (config.seeds.empty()) throw ConfigError("run config has no seeds");
  if (config.sample.n == 0) throw ConfigError("sample size n must be positive");
  if (config.jobs == 0) throw ConfigError("jobs must be positive");
  std::set<std::string> names;
  for (const auto& method : config.methods) {
    if (!names.insert(method_name(method)).second) {
      throw ConfigError("method '" + method_name(method) + "' listed twice");
    }
  }
  std::set<std::string> task_names;
  for (const auto& task : config.tasks) {
    if (!task_names.insert(task.name).second) {
      throw ConfigError("task '" + task.name + "' listed twice");
    }
  }
}

std::vector<std::string> EvalReport::containment_violations() const {
  std::vector<std::string> violations;
  for (const auto& [key, mask_cell] : mask_cells) {
    const Method method = parse_method(key.second);
    if (method.poe.step2_mode != Step2Mode::masked_scoring) continue;
    const CellStats& acc_cell = cells.at(key);
    for (std::size_t s = 0; s < acc_cell.per_seed.size(); ++s) {
      if (acc_cell.per_seed[s] > mask_cell.per_seed[s]) {
        violations.push_back(key.first + "/" + key.second + " seed " + std::to_string(seeds[s]) +
                             ": accuracy " + std::to_string(acc_cell.per_seed[s]) +
                             " > masking accuracy " + std::to_string(mask_cell.per_seed[s]));
      }
    }
  }
  return violations;
}

EvalReport run_grid(const RunConfig& config, const Backends& backends) {
  validate(config);
  EvalReport report;
  report.seeds = config.seeds;
  for (const auto& method : config.methods) report.methods.push_back(method_name(method));

  for (const auto& task : config.tasks) {
    report.tasks.push_back(task.name);
    LoadedTask loaded = load_task(task);
    report.load_stats[task.name] = loaded.stats;
    if (loaded.stats.skipped_missing_gold > 0) {
      report.warnings.push_back(task.name + ": skipped " +
                                std::to_string(loaded.stats.skipped_missing_gold) +
                                " records without a usable gold answer");
    }
    if (loaded.stats.dropped_option_count > 0) {
      report.warnings.push_back(task.name + ": dropped " +
                                std::to_string(loaded.stats.dropped_option_count) +
                                " instances whose option count differs from " +
                                std::to_string(loaded.stats.modal_option_count));
    }
    if (loaded.instances.empty()) throw DataError("task '" + task.name + "' has no instances");

    std::optional<LoadedTask> external_pool;
    if (auto it = config.demo_pools.find(task.name);
        config.fewshot_k > 0 && it != config.demo_pools.end()) {
      external_pool = load_task(it->second);
    }

    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
      const std::uint64_t seed = config.seeds[s];
      std::vector<Instance> eval_pool = loaded.instances;
      std::vector<Demonstration> demos;
      if (config.fewshot_k > 0) {
        const auto& pool = external_pool ? external_pool->instances : loaded.instances;
        FewShotDraw draw = build_fewshot(pool, config.fewshot_k, demo_seed(seed));
        if (!external_pool) eval_pool = exclude_ids(eval_pool, draw.demo_ids);
        demos = std::move(draw.demonstrations);
      }
      const SampleSpec spec{config.sample.n, config.per_seed_sampling ? seed : config.sample.seed};
      SampleResult sampled = sample_instances(eval_pool, spec);
      if (sampled.truncated && s == 0) {
        report.warnings.push_back(task.name + ": requested " + std::to_string(config.sample.n) +
                                  " instances, only " +
                                  std::to_string(sampled.instances.size()) + " available");
      }
      if (sampled.instances.empty()) {
        throw DataError("task '" + task.name + "' has no instances left to evaluate");
      }
      const std::vector<Instance> instances =
          with_demonstrations(std::move(sampled.instances), demos);
      report.evaluated[task.name] = instances.size();

      for (const auto& method : config.methods) {
        const std::string name = method_name(method);
        const auto outcomes = predict_all(method, instances, backends, config.jobs);

        std::size_t correct = 0, kept = 0, failures = 0, transport = 0, inconsistent = 0,
                    extraction_failures = 0;
        for (std::size_t i = 0; i < instances.size(); ++i) {
          const Outcome& out = outcomes[i];
          const std::size_t gold = instances[i].gold_index;
          if (!out.prediction) {
            ++failures;
            if (out.transport_failure) ++transport;
          } else {
            if (out.prediction->is_correct(gold)) ++correct;
            if (gold_kept(*out.prediction, gold)) ++kept;
            if (out.prediction->trace) {
              if (out.prediction->trace->inconsistent) ++inconsistent;
              if (out.prediction->trace->extraction_failed) ++extraction_failures;
            }
          }
          if (config.keep_traces) {
            report.records.push_back(
                {task.name, name, seed, instances[i].id, gold, out.prediction, out.error});
          }
        }
        if (transport == instances.size()) {
          throw SystemicBackendFailure("every instance of " + task.name + "/" + name +
                                       " failed at the transport layer; first error: " +
                                       outcomes.front().error);
        }

        const double total = static_cast<double>(instances.size());
        CellStats& cell = report.cells[{task.name, name}];
        cell.per_seed.push_back(static_cast<double>(correct) / total);
        cell.failures += failures;
        cell.inconsistent += inconsistent;
        cell.extraction_failures += extraction_failures;
        if (method.is_poe()) {
          CellStats& mask_cell = report.mask_cells[{task.name, name}];
          mask_cell.per_seed.push_back(static_cast<double>(kept) / total);
          mask_cell.failures += failures;
        }
      }
    }
  }

  for (auto& [key, cell] : report.cells) finalize(cell);
  for (auto& [key, cell] : report.mask_cells) finalize(cell);
  for (const auto& task : report.tasks) {
    auto poe = report.cells.find({task, "poe"});
    auto mcp = report.cells.find({task, "mcp"});
    if (poe != report.cells.end() && mcp != report.cells.end()) {
      report.gaps[task] = poe->second.mean - mcp->second.mean;
    }
  }
  return report;
}

SweepResult sweep_configurations(const RunConfig& config, const std::vector<ScorerKind>& scorers,
                                 const std::vector<EliminationStrategy>& strategies,
                                 const Backends& backends) {
  RunConfig grid = config;
  grid.methods.clear();
  for (auto scorer : scorers) {
    for (auto strategy : strategies) {
      Method method;
      method.kind = Method::Kind::poe;
      method.poe.step1_scorer.kind = scorer;
      method.poe.strategy = strategy;
      grid.methods.push_back(method);
    }
  }

  SweepResult result;
  result.report = run_grid(grid, backends);
  for (const auto& method : grid.methods) {
    const std::string name = method_name(method);
    std::vector<double> acc, acc_mask;
    for (const auto& task : result.report.tasks) {
      acc.push_back(result.report.cells.at({task, name}).mean);
      acc_mask.push_back(result.report.mask_cells.at({task, name}).mean);
    }
    result.rows.push_back(
        {method.poe.step1_scorer.kind, method.poe.strategy, mean(acc_mask), mean(acc)});
  }
  return result;
}

}  // namespace poe
