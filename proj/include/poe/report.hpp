#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "poe/eval.hpp"

namespace poe {

// task,method,mean,std,seed_<s>...  (accuracies as fractions, 6 decimals)
std::string accuracy_csv(const EvalReport& report);
// task,method,mean_acc_mask,std_acc_mask,seed_<s>...  (PoE methods only)
std::string masking_csv(const EvalReport& report);
// Results table (tasks x methods, percent with std), PoE - MCP gaps,
// masking accuracy, warnings and run metadata.
std::string markdown_report(const EvalReport& report);

// scorer,strategy,acc_mask,acc
std::string sweep_csv(const SweepResult& sweep);
std::string sweep_markdown(const SweepResult& sweep);

// Step scores serialize as numbers, eliminated entries as the string "eliminated".
nlohmann::json to_json(const Score& score);
nlohmann::json to_json(const OptionScores& scores);
nlohmann::json to_json(const RenderedPrompt& prompt);
nlohmann::json to_json(const Prediction& prediction);
// One trace line: task, method, seed, id, gold, prediction fields, error.
nlohmann::json to_json(const InstanceRecord& record);

}  // namespace poe
