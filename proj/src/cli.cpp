#include "poe/cli.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "poe/config.hpp"
#include "poe/datasets.hpp"
#include "poe/errors.hpp"
#include "poe/report.hpp"
#include "poe/scorers.hpp"
#include "poe/templates.hpp"

namespace poe::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct CommonOptions {
  std::string config;
  std::string tasks;
  std::string methods;
  std::string seeds;
  std::optional<std::size_t> n;
  std::string backend_url;
  std::string model;
  std::optional<std::size_t> jobs;
  bool trace = false;
  bool dump_canonical = false;
  std::string out_dir;
  std::vector<std::string> sets;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--config", o.config, "JSON config file")->required();
  cmd.add_option("--tasks", o.tasks, "comma-separated task names to keep");
  cmd.add_option("--methods", o.methods, "comma-separated methods");
  cmd.add_option("--seeds", o.seeds, "comma-separated integer seeds");
  cmd.add_option("--n", o.n, "instances sampled per task and seed");
  cmd.add_option("--backend-url", o.backend_url, "OpenAI-compatible base URL (selects http)");
  cmd.add_option("--model", o.model, "model name sent to the backend");
  cmd.add_option("--jobs", o.jobs, "concurrent instances per cell");
  cmd.add_flag("--trace", o.trace, "write traces.jsonl");
  cmd.add_flag("--dump-canonical", o.dump_canonical, "write <task>.canonical.jsonl");
  cmd.add_option("--out-dir", o.out_dir, "output directory");
  cmd.add_option("--set", o.sets, "override a field: dotted.path=value (repeatable)");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    std::string item = text.substr(start, comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

ordered_json seeds_json(const std::string& text) {
  ordered_json seeds = ordered_json::array();
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const auto value = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      seeds.push_back(value);
    } catch (const std::exception&) {
      throw ConfigError("--seeds entry '" + item + "' is not a non-negative integer");
    }
  }
  return seeds;
}

AppConfig prepare(const CommonOptions& o) {
  ordered_json doc = load_config_document(o.config);
  for (const auto& set : o.sets) {
    const auto eq = set.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects path=value, got '" + set + "'");
    apply_override(doc, set.substr(0, eq), set.substr(eq + 1));
  }
  if (!o.tasks.empty()) {
    ordered_json kept = ordered_json::array();
    for (const auto& name : split_list(o.tasks)) {
      bool found = false;
      for (const auto& task : doc.at("tasks")) {
        if (task.is_object() && task.value("name", std::string()) == name) {
          kept.push_back(task);
          found = true;
        }
      }
      if (!found) throw ConfigError("--tasks names unknown task '" + name + "'");
    }
    doc["tasks"] = kept;
  }
  if (!o.methods.empty()) {
    doc["methods"] = ordered_json::array();
    for (const auto& m : split_list(o.methods)) doc["methods"].push_back(m);
  }
  if (!o.seeds.empty()) doc["seeds"] = seeds_json(o.seeds);
  if (o.n) doc["sample"]["n"] = *o.n;
  if (!o.backend_url.empty()) {
    doc["backend"]["kind"] = "http";
    doc["backend"]["base_url"] = o.backend_url;
  }
  if (!o.model.empty()) doc["backend"]["model"] = o.model;
  if (o.jobs) doc["jobs"] = *o.jobs;
  if (o.trace) doc["trace"] = true;
  if (o.dump_canonical) doc["dump_canonical"] = true;
  if (!o.out_dir.empty()) doc["out_dir"] = o.out_dir;

  AppConfig config = parse_config(doc, fs::path(o.config).parent_path());
  for (const auto& task : config.run.tasks) load_task(task);  // surface data errors early
  for (const auto& [name, pool] : config.run.demo_pools) load_task(pool);
  return config;
}

struct BackendPair {
  std::shared_ptr<Backend> scoring;
  std::shared_ptr<Backend> generation;
  Backends view() const { return {*scoring, *generation}; }
};

BackendPair make_backends(const AppConfig& config) {
  BackendPair pair;
  pair.scoring = make_backend(config.backend);
  pair.generation =
      config.generation_backend ? make_backend(*config.generation_backend) : pair.scoring;
  return pair;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

void write_run_outputs(const AppConfig& config, const EvalReport& report) {
  fs::create_directories(config.out_dir);
  write_file(config.out_dir / "results.csv", accuracy_csv(report));
  if (!report.mask_cells.empty()) write_file(config.out_dir / "masking.csv", masking_csv(report));
  write_file(config.out_dir / "report.md", markdown_report(report));
  if (config.trace) {
    std::string lines;
    for (const auto& record : report.records) lines += to_json(record).dump() + "\n";
    write_file(config.out_dir / "traces.jsonl", lines);
  }
  if (config.dump_canonical) {
    for (const auto& task : config.run.tasks) {
      write_file(config.out_dir / (task.name + ".canonical.jsonl"),
                 canonical_jsonl(load_task(task).instances));
    }
  }
}

int check_invariants(const EvalReport& report, std::ostream& err) {
  const auto violations = report.containment_violations();
  for (const auto& v : violations) err << "invariant violated: " << v << "\n";
  return violations.empty() ? kExitOk : kExitInvariant;
}

int cmd_run(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  AppConfig config = prepare(o);
  config.run.keep_traces = config.trace;
  const BackendPair backends = make_backends(config);
  const EvalReport report = run_grid(config.run, backends.view());
  write_run_outputs(config, report);
  out << markdown_report(report);
  return check_invariants(report, err);
}

int cmd_sweep(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  AppConfig config = prepare(o);
  config.run.keep_traces = config.trace;
  const BackendPair backends = make_backends(config);
  const SweepResult sweep = sweep_configurations(config.run, config.sweep_scorers,
                                                 config.sweep_strategies, backends.view());
  write_run_outputs(config, sweep.report);
  write_file(config.out_dir / "sweep.csv", sweep_csv(sweep));
  write_file(config.out_dir / "sweep.md", sweep_markdown(sweep));
  out << sweep_markdown(sweep);
  return check_invariants(sweep.report, err);
}

struct InstanceSelector {
  std::string task;
  std::string id;
};

Instance find_instance(const AppConfig& config, const InstanceSelector& sel) {
  const TaskSpec* spec = nullptr;
  for (const auto& task : config.run.tasks) {
    if (task.name == sel.task) spec = &task;
  }
  if (!spec) {
    if (!sel.task.empty()) throw ConfigError("unknown task '" + sel.task + "'");
    if (config.run.tasks.size() != 1) throw ConfigError("--task is required with several tasks");
    spec = &config.run.tasks.front();
  }
  for (auto& instance : load_task(*spec).instances) {
    if (instance.id == sel.id) return instance;
  }
  throw ConfigError("task '" + spec->name + "' has no instance with id '" + sel.id + "'");
}

int cmd_trace(const CommonOptions& o, const InstanceSelector& sel, const std::string& method_text,
              std::ostream& out) {
  const AppConfig config = prepare(o);
  const Instance instance = find_instance(config, sel);
  const Method method = parse_method(method_text);
  const BackendPair backends = make_backends(config);
  const Prediction prediction = predict(method, instance, backends.view());

  nlohmann::json doc = {{"task", instance.task_name},
                        {"method", method_name(method)},
                        {"id", instance.id},
                        {"gold_index", instance.gold_index}};
  doc.update(to_json(prediction));
  doc["correct"] = prediction.is_correct(instance.gold_index);
  out << doc.dump(2) << "\n";
  return kExitOk;
}

Mask parse_mask(const std::string& text, std::size_t n) {
  if (text.empty()) return Mask::all_kept(n);
  std::vector<bool> bits;
  for (const auto& item : split_list(text)) {
    if (item != "0" && item != "1") throw ConfigError("--mask entries must be 0 or 1");
    bits.push_back(item == "1");
  }
  Mask mask(std::move(bits));
  try {
    validate(mask, n);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("--mask: ") + e.what());
  }
  return mask;
}

// <row>.<k>.context.txt / <row>.<k>.continuation.txt for every option k.
int cmd_render(const CommonOptions& o, const InstanceSelector& sel, const std::string& mask_text,
               const std::string& dir, std::ostream& out) {
  const AppConfig config = prepare(o);
  const Instance instance = find_instance(config, sel);
  const Mask mask = parse_mask(mask_text, instance.option_count());

  const std::vector<std::pair<std::string, std::vector<RenderedPrompt>>> rows = {
      {"lm", render_plain(instance, PromptStyle::lm_suffix)},
      {"avg", render_plain(instance, PromptStyle::lm_suffix)},
      {"calibration_contextual", render_plain(instance, PromptStyle::lm_suffix)},
      {"calibration_null", render_plain(instance, PromptStyle::null_context)},
      {"channel", render_plain(instance, PromptStyle::channel)},
      {"mcp", render_plain(instance, PromptStyle::mcp)},
      {"poe_elimination", render_plain(instance, PromptStyle::mcp)},
      {"poe_prediction", render_masked(instance, mask)},
  };
  fs::create_directories(dir);
  std::size_t files = 0;
  for (const auto& [row, prompts] : rows) {
    for (std::size_t k = 0; k < prompts.size(); ++k) {
      const std::string stem = row + "." + std::to_string(k);
      write_file(fs::path(dir) / (stem + ".context.txt"), prompts[k].context);
      write_file(fs::path(dir) / (stem + ".continuation.txt"), prompts[k].continuation);
      files += 2;
    }
  }
  out << "wrote " << files << " prompt files to " << dir << "\n";
  return kExitOk;
}

int cmd_validate(const CommonOptions& o, std::ostream& out) {
  const AppConfig config = prepare(o);
  make_backends(config);
  out << "config ok: " << config.run.tasks.size() << " task(s), " << config.run.methods.size()
      << " method(s), " << config.run.seeds.size() << " seed(s)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-choice evaluation harness with process-of-elimination scoring", "poe"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, trace_opts, render_opts, validate_opts;
  InstanceSelector trace_sel, render_sel;
  std::string trace_method = "poe";
  std::string render_mask, render_dir;

  auto* run = app.add_subcommand("run", "evaluate every (task, method, seed) and write reports");
  add_common(*run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "PoE over every (scorer, elimination strategy) pair");
  add_common(*sweep, sweep_opts);
  auto* trace = app.add_subcommand("trace", "print the full trace of one instance as JSON");
  add_common(*trace, trace_opts);
  trace->add_option("--task", trace_sel.task, "task name");
  trace->add_option("--id", trace_sel.id, "instance id")->required();
  trace->add_option("--method", trace_method, "method name");
  auto* render = app.add_subcommand("render", "write every rendered prompt of one instance");
  add_common(*render, render_opts);
  render->add_option("--task", render_sel.task, "task name");
  render->add_option("--id", render_sel.id, "instance id")->required();
  render->add_option("--mask", render_mask, "comma-separated 0/1 mask for the PoE prediction row");
  render->add_option("--dir", render_dir, "directory for prompt files")->required();
  auto* validate_cmd = app.add_subcommand("validate", "parse and check a config without running");
  add_common(*validate_cmd, validate_opts);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts, out, err);
    if (*sweep) return cmd_sweep(sweep_opts, out, err);
    if (*trace) return cmd_trace(trace_opts, trace_sel, trace_method, out);
    if (*render) return cmd_render(render_opts, render_sel, render_mask, render_dir, out);
    if (*validate_cmd) return cmd_validate(validate_opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SystemicBackendFailure& e) {
    err << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  } catch (const TransportError& e) {
    err << "backend unreachable: " << e.what() << "\n";
    return kExitBackend;
  } catch (const CapabilityError& e) {
    err << "backend capability error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace poe::cli
