#include "poe/elimination.hpp"

#include <cctype>
#include <cmath>

#include "poe/errors.hpp"
#include "poe/templates.hpp"

namespace poe {
namespace {

void require_finite(const OptionScores& scores) {
  if (scores.size() < 2) {
    throw InvalidInput("elimination needs at least 2 scores, got " +
                       std::to_string(scores.size()));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].is_eliminated() || !std::isfinite(scores[i].value())) {
      throw InvalidInput("elimination input score " + std::to_string(i) + " is not finite");
    }
  }
}

template <typename Fn>
auto in_step(const char* step, Fn&& fn) {
  try {
    return fn();
  } catch (Error& e) {
    e.add_context(step);
    throw;
  }
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && (std::isalnum(u) != 0 || c == '_');
}

Prediction from_final_scores(OptionScores final_scores, Trace trace) {
  Prediction prediction;
  prediction.chosen_index = final_scores.argmax();
  trace.tie_broken = final_scores.argmax_is_tied();
  prediction.final_scores = std::move(final_scores);
  prediction.trace = std::move(trace);
  return prediction;
}

}  // namespace

const char* to_string(EliminationStrategy strategy) {
  switch (strategy) {
    case EliminationStrategy::below_average: return "below_average";
    case EliminationStrategy::lowest: return "lowest";
  }
  return "unknown";
}

const char* to_string(Step2Mode mode) {
  switch (mode) {
    case Step2Mode::masked_scoring: return "masked_scoring";
    case Step2Mode::masked_prompting: return "masked_prompting";
  }
  return "unknown";
}

EliminationStrategy parse_strategy(std::string_view name) {
  if (name == "below_average") return EliminationStrategy::below_average;
  if (name == "lowest") return EliminationStrategy::lowest;
  throw ConfigError("unknown elimination strategy '" + std::string(name) +
                    "' (expected below_average|lowest)");
}

Step2Mode parse_step2_mode(std::string_view name) {
  if (name == "masked_scoring") return Step2Mode::masked_scoring;
  if (name == "masked_prompting") return Step2Mode::masked_prompting;
  throw ConfigError("unknown step-2 mode '" + std::string(name) +
                    "' (expected masked_scoring|masked_prompting)");
}

EliminationResult eliminate_below_average(const OptionScores& scores) {
  require_finite(scores);
  // s_i < mean(s) <=> sum_j (s_j - s_i) > 0
  std::vector<bool> keep(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    long double excess = 0.0L;
    for (const auto& s : scores.values) {
      excess += static_cast<long double>(s.value()) - static_cast<long double>(scores[i].value());
    }
    keep[i] = !(excess > 0.0L);
  }
  return {Mask(std::move(keep)), to_string(EliminationStrategy::below_average), scores};
}

EliminationResult eliminate_lowest(const OptionScores& scores) {
  require_finite(scores);
  std::size_t lowest = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[lowest]) lowest = i;
  }
  std::vector<bool> keep(scores.size(), true);
  keep[lowest] = false;
  return {Mask(std::move(keep)), to_string(EliminationStrategy::lowest), scores};
}

EliminationResult eliminate(EliminationStrategy strategy, const OptionScores& scores) {
  switch (strategy) {
    case EliminationStrategy::below_average: return eliminate_below_average(scores);
    case EliminationStrategy::lowest: return eliminate_lowest(scores);
  }
  throw InvalidInput("unknown elimination strategy");
}

Prediction poe_predict(const Instance& instance, Backend& backend, const PoEConfig& config) {
  if (config.step2_mode == Step2Mode::masked_prompting) {
    return poe_predict_prompting(instance, backend, backend, config);
  }
  const OptionScores step1 = in_step("step 1 (elimination)", [&] {
    return score(config.step1_scorer.kind, instance, backend);
  });
  return poe_predict_from_scores(instance, backend, step1, config);
}

Prediction poe_predict_from_scores(const Instance& instance, Backend& backend,
                                   const OptionScores& step1_scores, const PoEConfig& config) {
  validate(instance);
  if (step1_scores.size() != instance.option_count()) {
    throw InvalidInput("step-1 scores have " + std::to_string(step1_scores.size()) +
                       " entries for " + std::to_string(instance.option_count()) + " options");
  }
  Trace trace;
  trace.elimination = in_step("step 1 (elimination)",
                              [&] { return eliminate(config.strategy, step1_scores); });
  trace.step1_prompts = scorer_prompts(config.step1_scorer.kind, instance);
  trace.step2_prompts = render_masked(instance, trace.elimination->mask);

  OptionScores final_scores = in_step("step 2 (prediction)", [&] {
    return score_mcp(instance, backend, trace.elimination->mask);
  });
  return from_final_scores(std::move(final_scores), std::move(trace));
}

Prediction poe_predict_prompting(const Instance& instance, Backend& scoring_backend,
                                 Backend& generation_backend, const PoEConfig& config) {
  const OptionScores step1 = in_step("step 1 (elimination)", [&] {
    return score(config.step1_scorer.kind, instance, scoring_backend);
  });

  Trace trace;
  trace.elimination = in_step("step 1 (elimination)",
                              [&] { return eliminate(config.strategy, step1); });
  trace.step1_prompts = scorer_prompts(config.step1_scorer.kind, instance);

  const std::string prompt = masked_context(instance, trace.elimination->mask);
  trace.step2_prompts.push_back({prompt, "", PromptPurpose::generation});
  const std::string reply = in_step("step 2 (prediction)", [&] {
    try {
      return generation_backend.generate({prompt, config.max_tokens, config.temperature});
    } catch (Error& e) {
      e.add_context("instance '" + instance.id + "'");
      throw;
    }
  });
  trace.generation = reply;

  Prediction prediction;
  prediction.chosen_index = extract_answer(reply, instance.option_count());
  prediction.final_scores = {std::vector<Score>(instance.option_count(), Score(0.0)),
                             "extracted_answer"};
  if (prediction.chosen_index) {
    prediction.final_scores.values[*prediction.chosen_index] = Score(1.0);
    trace.inconsistent = !trace.elimination->mask.keeps(*prediction.chosen_index);
  } else {
    trace.extraction_failed = true;
  }
  prediction.trace = std::move(trace);
  return prediction;
}

std::optional<std::size_t> extract_answer(std::string_view text, std::size_t option_count) {
  if (option_count > kMaxSymbolOptions) {
    throw UnsupportedSymbolRange(std::to_string(option_count) +
                                 " options exceed the A-Z symbol range");
  }
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c < 'A' || c >= static_cast<char>('A' + option_count)) continue;
    const bool left_ok = i == 0 || !is_word_char(text[i - 1]);
    const bool right_ok = i + 1 == text.size() || !is_word_char(text[i + 1]);
    if (left_ok && right_ok) last = static_cast<std::size_t>(c - 'A');
  }
  return last;
}

}  // namespace poe
