#include "poe/core.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "poe/errors.hpp"

namespace poe {
namespace {

bool is_blank(const std::string& text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void validate_options(const std::string& who, const std::vector<std::string>& options,
                      std::size_t gold_index) {
  if (options.size() < 2) {
    throw InvalidInput(who + ": needs at least 2 options, got " +
                       std::to_string(options.size()));
  }
  if (gold_index >= options.size()) {
    throw InvalidInput(who + ": gold_index " + std::to_string(gold_index) +
                       " out of range for " + std::to_string(options.size()) + " options");
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (is_blank(options[i])) {
      throw InvalidInput(who + ": option " + std::to_string(i) + " is blank");
    }
  }
}

}  // namespace

void validate(const Instance& instance) {
  const std::string who = "instance '" + instance.id + "'";
  validate_options(who, instance.options, instance.gold_index);
  for (std::size_t d = 0; d < instance.demonstrations.size(); ++d) {
    const auto& demo = instance.demonstrations[d];
    validate_options(who + " demonstration " + std::to_string(d), demo.options,
                     demo.gold_index);
  }
}

double Score::value() const {
  return eliminated_ ? -std::numeric_limits<double>::infinity() : value_;
}

std::size_t OptionScores::argmax() const {
  if (values.empty()) throw InvalidInput("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[best] < values[i]) best = i;
  }
  if (values[best].is_eliminated()) {
    throw InvalidInput("argmax: every option is eliminated");
  }
  return best;
}

bool OptionScores::argmax_is_tied() const {
  const std::size_t best = argmax();
  return std::count(values.begin(), values.end(), values[best]) > 1;
}

std::size_t Mask::survivor_count() const {
  return static_cast<std::size_t>(std::count(keep_.begin(), keep_.end(), true));
}

void validate(const Mask& mask, std::size_t option_count) {
  if (mask.size() != option_count) {
    throw InvalidInput("mask has " + std::to_string(mask.size()) + " bits for " +
                       std::to_string(option_count) + " options");
  }
  if (mask.survivor_count() == 0) throw InvalidInput("mask eliminates every option");
}

const char* to_string(PromptPurpose purpose) {
  switch (purpose) {
    case PromptPurpose::option_scoring: return "option_scoring";
    case PromptPurpose::symbol_scoring: return "symbol_scoring";
    case PromptPurpose::generation: return "generation";
  }
  return "unknown";
}

char option_symbol(std::size_t index) {
  if (index >= kMaxSymbolOptions) {
    throw UnsupportedSymbolRange("option index " + std::to_string(index) +
                                 " has no symbol (A-Z supports 26 options)");
  }
  return static_cast<char>('A' + index);
}

}  // namespace poe
