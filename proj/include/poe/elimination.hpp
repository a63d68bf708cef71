#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "poe/backend.hpp"
#include "poe/core.hpp"
#include "poe/scorers.hpp"

namespace poe {

enum class EliminationStrategy {
  below_average,  // drop every option scoring strictly below the mean of all n
  lowest,         // drop the single minimum (lowest index on ties)
};

enum class Step2Mode {
  masked_scoring,    // re-score symbols under the masked prompt
  masked_prompting,  // generate from the masked prompt and extract a symbol
};

const char* to_string(EliminationStrategy strategy);
const char* to_string(Step2Mode mode);
EliminationStrategy parse_strategy(std::string_view name);
Step2Mode parse_step2_mode(std::string_view name);

struct PoEConfig {
  ScorerConfig step1_scorer{ScorerKind::mcp};
  EliminationStrategy strategy = EliminationStrategy::below_average;
  Step2Mode step2_mode = Step2Mode::masked_scoring;
  // Generation settings for masked_prompting.
  int max_tokens = 64;
  double temperature = 0.0;
};

// Throws InvalidInput when any score is non-finite or eliminated.
EliminationResult eliminate_below_average(const OptionScores& scores);
EliminationResult eliminate_lowest(const OptionScores& scores);
EliminationResult eliminate(EliminationStrategy strategy, const OptionScores& scores);

// Two-step prediction. Step 1 scores with config.step1_scorer and builds the
// mask; step 2 follows config.step2_mode on the same backend. The returned
// trace carries both score vectors, the mask and every prompt.
Prediction poe_predict(const Instance& instance, Backend& backend, const PoEConfig& config);

// Step 2 only, for callers that already hold step-1 scores. Always uses
// masked scoring.
Prediction poe_predict_from_scores(const Instance& instance, Backend& backend,
                                   const OptionScores& step1_scores, const PoEConfig& config);

// Prompting variant: step 1 on `scoring_backend`, step 2 generates from the
// masked prompt on `generation_backend` and takes the last option symbol in
// the reply. A reply with no symbol yields an empty chosen_index and
// trace.extraction_failed; picking an eliminated option sets trace.inconsistent.
Prediction poe_predict_prompting(const Instance& instance, Backend& scoring_backend,
                                 Backend& generation_backend, const PoEConfig& config);

// Index of the last standalone symbol A..(A+n-1) in `text`. A symbol is
// standalone when neither neighbour is an ASCII letter, digit or underscore.
// Throws UnsupportedSymbolRange for n > 26.
std::optional<std::size_t> extract_answer(std::string_view text, std::size_t option_count);

}  // namespace poe
