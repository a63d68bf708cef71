#include "poe/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace poe {
namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string signed_fixed(double value, int decimals) {
  return (value >= 0 ? "+" : "") + fixed(value, decimals);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string seed_header(const EvalReport& report) {
  std::string out;
  for (auto seed : report.seeds) out += ",seed_" + std::to_string(seed);
  return out;
}

std::string cell_row(const std::string& task, const std::string& method, const CellStats& cell) {
  std::string out = csv_field(task) + "," + csv_field(method) + "," + fixed(cell.mean, 6) + "," +
                    fixed(cell.std, 6);
  for (double v : cell.per_seed) out += "," + fixed(v, 6);
  return out + "\n";
}

std::string percent_cell(const CellStats& cell) {
  return fixed(cell.mean * 100.0, 1) + " (" + fixed(cell.std * 100.0, 1) + ")";
}

// Published accuracies (percent) for a 3B instruction-tuned model; printed
// next to matching task names for orientation only.
struct Reference {
  const char* method;
  double mean;
};
const std::map<std::string, std::vector<Reference>>& reference_table() {
  static const std::map<std::string, std::vector<Reference>> table = {
      {"ANLI", {{"lm", 38.6}, {"avg", 38.0}, {"calibration", 37.2}, {"channel", 36.0}, {"mcp", 57.8}, {"poe", 55.0}}},
      {"CQA", {{"lm", 64.4}, {"avg", 54.2}, {"calibration", 69.6}, {"channel", 44.6}, {"mcp", 87.2}, {"poe", 89.2}}},
      {"SIQA", {{"lm", 56.0}, {"avg", 62.6}, {"calibration", 57.6}, {"channel", 39.8}, {"mcp", 79.0}, {"poe", 82.0}}},
      {"LD", {{"lm", 48.8}, {"avg", 45.8}, {"calibration", 39.2}, {"channel", 20.8}, {"mcp", 39.8}, {"poe", 53.6}}},
      {"DQA", {{"lm", 45.8}, {"avg", 51.8}, {"calibration", 48.0}, {"channel", 39.6}, {"mcp", 67.8}, {"poe", 67.4}}},
      {"CC", {{"lm", 44.8}, {"avg", 51.8}, {"calibration", 54.4}, {"channel", 44.0}, {"mcp", 60.2}, {"poe", 72.2}}},
      {"SS", {{"lm", 39.0}, {"avg", 40.6}, {"calibration", 43.4}, {"channel", 26.6}, {"mcp", 74.0}, {"poe", 76.6}}},
      {"SIT", {{"lm", 24.8}, {"avg", 20.6}, {"calibration", 21.0}, {"channel", 17.0}, {"mcp", 25.4}, {"poe", 25.2}}},
      {"LA", {{"mcp", 50.0}, {"poe", 68.8}}},
      {"IMT", {{"mcp", 34.0}, {"poe", 47.2}}},
      {"CLD", {{"mcp", 67.2}, {"poe", 75.9}}},
      {"RACO", {{"mcp", 53.8}, {"poe", 60.6}}},
      {"CAI", {{"mcp", 84.1}, {"poe", 81.8}}},
      {"EIE", {{"mcp", 25.0}, {"poe", 19.1}}},
      {"RS", {{"mcp", 55.1}, {"poe", 49.0}}},
      {"IOM", {{"mcp", 56.2}, {"poe", 50.0}}},
  };
  return table;
}

}  // namespace

std::string accuracy_csv(const EvalReport& report) {
  std::string out = "task,method,mean,std" + seed_header(report) + "\n";
  for (const auto& task : report.tasks) {
    for (const auto& method : report.methods) {
      out += cell_row(task, method, report.cells.at({task, method}));
    }
  }
  return out;
}

std::string masking_csv(const EvalReport& report) {
  std::string out = "task,method,mean_acc_mask,std_acc_mask" + seed_header(report) + "\n";
  for (const auto& task : report.tasks) {
    for (const auto& method : report.methods) {
      if (auto it = report.mask_cells.find({task, method}); it != report.mask_cells.end()) {
        out += cell_row(task, method, it->second);
      }
    }
  }
  return out;
}

std::string markdown_report(const EvalReport& report) {
  std::string out = "## Accuracy (%), mean (std) over seeds\n\n| Task |";
  for (const auto& method : report.methods) out += " " + method + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < report.methods.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& task : report.tasks) {
    // Rank distinct means to mark best (bold) and second best (underlined).
    std::vector<double> means;
    for (const auto& method : report.methods) means.push_back(report.cells.at({task, method}).mean);
    std::vector<double> ranked = means;
    std::sort(ranked.begin(), ranked.end(), std::greater<>());
    ranked.erase(std::unique(ranked.begin(), ranked.end()), ranked.end());

    out += "| " + task + " |";
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
      std::string text = percent_cell(report.cells.at({task, report.methods[m]}));
      if (report.methods.size() > 1 && means[m] == ranked[0]) {
        text = "**" + text + "**";
      } else if (report.methods.size() > 2 && ranked.size() > 1 && means[m] == ranked[1]) {
        text = "<u>" + text + "</u>";
      }
      out += " " + text + " |";
    }
    out += "\n";
  }

  if (!report.gaps.empty()) {
    out += "\n## PoE vs MCP\n\n| Task | MCP | PoE | PoE - MCP |\n|---|---|---|---|\n";
    for (const auto& task : report.tasks) {
      auto it = report.gaps.find(task);
      if (it == report.gaps.end()) continue;
      out += "| " + task + " | " + fixed(report.cells.at({task, "mcp"}).mean * 100.0, 1) + " | " +
             fixed(report.cells.at({task, "poe"}).mean * 100.0, 1) + " | " +
             signed_fixed(it->second * 100.0, 1) + " |\n";
    }
  }

  if (!report.mask_cells.empty()) {
    out += "\n## Masking accuracy (%)\n\n| Task | Method | Acc_mask | Acc |\n|---|---|---|---|\n";
    for (const auto& task : report.tasks) {
      for (const auto& method : report.methods) {
        auto it = report.mask_cells.find({task, method});
        if (it == report.mask_cells.end()) continue;
        out += "| " + task + " | " + method + " | " + percent_cell(it->second) + " | " +
               percent_cell(report.cells.at({task, method})) + " |\n";
      }
    }
  }

  std::string reference;
  for (const auto& task : report.tasks) {
    auto it = reference_table().find(task);
    if (it == reference_table().end()) continue;
    std::string entries;
    for (const auto& ref : it->second) {
      entries += (entries.empty() ? "" : ", ") + std::string(ref.method) + " " + fixed(ref.mean, 1);
    }
    reference += "| " + task + " | " + entries + " |\n";
  }
  if (!reference.empty()) {
    out += "\n## Published reference accuracy (%; 3B instruction-tuned model, not reproduced here)\n\n";
    out += "| Task | Accuracy |\n|---|---|\n" + reference;
  }

  std::size_t failures = 0, inconsistent = 0, extraction = 0;
  for (const auto& [key, cell] : report.cells) {
    failures += cell.failures;
    inconsistent += cell.inconsistent;
    extraction += cell.extraction_failures;
  }
  out += "\n## Run metadata\n\n";
  out += "- seeds:";
  for (auto seed : report.seeds) out += " " + std::to_string(seed);
  out += "\n- sampler: " + std::string(kSamplerName) + "\n";
  out += "- std estimator: population (divide by number of seeds)\n";
  for (const auto& task : report.tasks) {
    out += "- " + task + ": " + std::to_string(report.evaluated.at(task)) +
           " instances per seed\n";
  }
  out += "- failed instances (scored incorrect): " + std::to_string(failures) + "\n";
  out += "- extraction failures: " + std::to_string(extraction) + "\n";
  out += "- inconsistent prompting picks: " + std::to_string(inconsistent) + "\n";
  for (const auto& warning : report.warnings) out += "- warning: " + warning + "\n";
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "scorer,strategy,acc_mask,acc\n";
  for (const auto& row : sweep.rows) {
    out += std::string(to_string(row.scorer)) + "," + to_string(row.strategy) + "," +
           fixed(row.acc_mask, 6) + "," + fixed(row.acc, 6) + "\n";
  }
  return out;
}

std::string sweep_markdown(const SweepResult& sweep) {
  std::string out =
      "## Elimination configurations (mean over tasks, %)\n\n| Scorer | Strategy | Acc_mask | Acc |\n"
      "|---|---|---|---|\n";
  for (const auto& row : sweep.rows) {
    out += "| " + std::string(to_string(row.scorer)) + " | " + to_string(row.strategy) + " | " +
           fixed(row.acc_mask * 100.0, 1) + " | " + fixed(row.acc * 100.0, 1) + " |\n";
  }
  return out;
}

nlohmann::json to_json(const Score& score) {
  if (score.is_eliminated()) return "eliminated";
  return score.value();
}

nlohmann::json to_json(const OptionScores& scores) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& s : scores.values) values.push_back(to_json(s));
  return {{"scorer", scores.scorer_name}, {"values", values}};
}

nlohmann::json to_json(const RenderedPrompt& prompt) {
  return {{"context", prompt.context},
          {"continuation", prompt.continuation},
          {"purpose", to_string(prompt.purpose)}};
}

nlohmann::json to_json(const Prediction& prediction) {
  nlohmann::json out;
  out["prediction"] = prediction.chosen_index ? nlohmann::json(*prediction.chosen_index)
                                              : nlohmann::json(nullptr);
  out["final_scores"] = to_json(prediction.final_scores);
  if (!prediction.trace) return out;
  const Trace& trace = *prediction.trace;
  if (trace.elimination) {
    out["strategy"] = trace.elimination->strategy_name;
    out["step1_scores"] = to_json(trace.elimination->step1_scores);
    nlohmann::json mask = nlohmann::json::array();
    for (bool keep : trace.elimination->mask.bits()) mask.push_back(keep ? 1 : 0);
    out["mask"] = mask;
    out["step2_scores"] = to_json(prediction.final_scores);
  }
  nlohmann::json step1 = nlohmann::json::array();
  for (const auto& p : trace.step1_prompts) step1.push_back(to_json(p));
  out["step1_prompts"] = step1;
  if (!trace.step2_prompts.empty()) {
    nlohmann::json step2 = nlohmann::json::array();
    for (const auto& p : trace.step2_prompts) step2.push_back(to_json(p));
    out["step2_prompts"] = step2;
  }
  if (trace.generation) out["generation"] = *trace.generation;
  out["extraction_failed"] = trace.extraction_failed;
  out["inconsistent"] = trace.inconsistent;
  out["tie_broken"] = trace.tie_broken;
  return out;
}

nlohmann::json to_json(const InstanceRecord& record) {
  nlohmann::json out = {{"task", record.task},
                        {"method", record.method},
                        {"seed", record.seed},
                        {"id", record.instance_id},
                        {"gold_index", record.gold_index}};
  if (record.prediction) {
    out.update(to_json(*record.prediction));
    out["correct"] = record.prediction->is_correct(record.gold_index);
  } else {
    out["prediction"] = nullptr;
    out["correct"] = false;
    out["error"] = record.error;
  }
  return out;
}

}  // namespace poe
