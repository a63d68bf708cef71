#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace poe {

// A solved example prepended to the prompt in few-shot runs.
struct Demonstration {
  std::string question;
  std::vector<std::string> options;
  std::size_t gold_index = 0;
};

// One multiple-choice item.
struct Instance {
  std::string id;
  std::string question;
  std::vector<std::string> options;
  std::size_t gold_index = 0;
  std::string task_name;
  std::vector<Demonstration> demonstrations;

  std::size_t option_count() const { return options.size(); }
};

// Throws InvalidInput unless: n >= 2, gold in range, every option non-blank.
// Demonstrations are checked the same way.
void validate(const Instance& instance);

// A per-option score. Eliminated entries compare strictly below every finite
// value and equal to each other; they carry no numeric payload.
class Score {
 public:
  Score() = default;
  explicit Score(double value) : value_(value) {}

  static Score eliminated() {
    Score s;
    s.eliminated_ = true;
    return s;
  }

  bool is_eliminated() const { return eliminated_; }
  // -infinity for eliminated entries.
  double value() const;

  friend bool operator<(const Score& a, const Score& b) {
    if (a.eliminated_ || b.eliminated_) return a.eliminated_ && !b.eliminated_;
    return a.value_ < b.value_;
  }
  friend bool operator>(const Score& a, const Score& b) { return b < a; }
  friend bool operator==(const Score& a, const Score& b) {
    if (a.eliminated_ || b.eliminated_) return a.eliminated_ == b.eliminated_;
    return a.value_ == b.value_;
  }

 private:
  double value_ = 0.0;
  bool eliminated_ = false;
};

struct OptionScores {
  std::vector<Score> values;
  std::string scorer_name;

  std::size_t size() const { return values.size(); }
  const Score& operator[](std::size_t i) const { return values[i]; }

  // Index of the largest score, lowest index on ties. Throws InvalidInput when
  // empty or when every entry is eliminated.
  std::size_t argmax() const;
  // True when more than one entry shares the maximum.
  bool argmax_is_tied() const;
};

// Per-option keep/eliminate bits. keeps(i) == false means option i is in the
// eliminated set and is rendered as "[MASK]".
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::vector<bool> keep) : keep_(std::move(keep)) {}
  static Mask all_kept(std::size_t n) { return Mask(std::vector<bool>(n, true)); }

  std::size_t size() const { return keep_.size(); }
  bool keeps(std::size_t i) const { return keep_.at(i); }
  std::size_t survivor_count() const;
  const std::vector<bool>& bits() const { return keep_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::vector<bool> keep_;
};

// Throws InvalidInput unless the mask has n bits and at least one survivor.
void validate(const Mask& mask, std::size_t option_count);

struct EliminationResult {
  Mask mask;
  std::string strategy_name;
  OptionScores step1_scores;
};

enum class PromptPurpose { option_scoring, symbol_scoring, generation };

struct RenderedPrompt {
  std::string context;
  std::string continuation;
  PromptPurpose purpose = PromptPurpose::option_scoring;

  std::string full_text() const { return context + continuation; }
  friend bool operator==(const RenderedPrompt&, const RenderedPrompt&) = default;
};

const char* to_string(PromptPurpose purpose);

struct Trace {
  std::optional<EliminationResult> elimination;
  std::vector<RenderedPrompt> step1_prompts;
  std::vector<RenderedPrompt> step2_prompts;
  // Raw completion text in prompting mode.
  std::optional<std::string> generation;
  bool extraction_failed = false;
  // Prompting mode picked an option the elimination step had masked.
  bool inconsistent = false;
  // Final argmax had a tie and was resolved to the lowest index.
  bool tie_broken = false;
};

struct Prediction {
  // Empty when answer extraction failed; such predictions count as incorrect.
  std::optional<std::size_t> chosen_index;
  OptionScores final_scores;
  std::optional<Trace> trace;

  bool is_correct(std::size_t gold_index) const {
    return chosen_index.has_value() && *chosen_index == gold_index;
  }
};

// Uppercase symbol for option i ('A' + i). Throws UnsupportedSymbolRange for i >= 26.
char option_symbol(std::size_t index);
inline constexpr std::size_t kMaxSymbolOptions = 26;

}  // namespace poe
