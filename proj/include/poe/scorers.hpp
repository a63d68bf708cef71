#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "poe/backend.hpp"
#include "poe/core.hpp"

namespace poe {

enum class ScorerKind { lm, avg, calibration, channel, mcp };

const char* to_string(ScorerKind kind);
// Accepts lm|avg|calibration|channel|mcp; throws ConfigError otherwise.
ScorerKind parse_scorer_kind(std::string_view name);

struct ScorerConfig {
  ScorerKind kind = ScorerKind::mcp;
};

// s_i = log P(option_i | "<q> the answer is:")
OptionScores score_lm(const Instance& instance, Backend& backend);

// s_i = log P(option_i | q) / token_count(option_i)
OptionScores score_avg(const Instance& instance, Backend& backend);

// s_i = log P(option_i | "<q> the answer is:") - log P(option_i | "the answer is:")
OptionScores score_calibration(const Instance& instance, Backend& backend);

// s_i = log P("<q> the answer is:" | option_i)
OptionScores score_channel(const Instance& instance, Backend& backend);

// s_i = log P(symbol_i | question with all options listed). With a mask the
// step-2 masked prompt is used instead and eliminated entries become the
// eliminated sentinel (their backend calls are skipped).
OptionScores score_mcp(const Instance& instance, Backend& backend,
                       const std::optional<Mask>& mask = std::nullopt);

// Dispatch on kind. Every scorer re-throws backend errors with the instance id
// attached.
OptionScores score(ScorerKind kind, const Instance& instance, Backend& backend);

// Every prompt the scorer sends, in call order.
std::vector<RenderedPrompt> scorer_prompts(ScorerKind kind, const Instance& instance);

}  // namespace poe
