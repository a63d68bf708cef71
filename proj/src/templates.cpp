#include "poe/templates.hpp"

#include <string>

#include "poe/errors.hpp"

namespace poe {
namespace {

std::string lm_context(const std::string& question) {
  return question + " " + std::string(kAnswerCue);
}

std::string spaced(const std::string& text) { return " " + text; }

void check_symbol_range(std::size_t n) {
  if (n > kMaxSymbolOptions) {
    throw UnsupportedSymbolRange(std::to_string(n) +
                                 " options exceed the A-Z symbol range");
  }
}

// "Question: <q>\nA. <o1>\n...\nAnswer:" with optional per-option replacement.
std::string mcp_block(const std::string& question, const std::vector<std::string>& options,
                      const Mask* mask) {
  check_symbol_range(options.size());
  std::string out = "Question: " + question + "\n";
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += option_symbol(i);
    out += ". ";
    out += (mask == nullptr || mask->keeps(i)) ? options[i] : std::string(kMaskToken);
    out += "\n";
  }
  out += "Answer:";
  return out;
}

// Demonstrations rendered as full context+gold continuation, each followed by
// a blank line.
std::string demo_prefix(const Instance& instance, PromptStyle style) {
  std::string out;
  for (const auto& demo : instance.demonstrations) {
    const std::string& gold = demo.options[demo.gold_index];
    switch (style) {
      case PromptStyle::lm_suffix:
        out += lm_context(demo.question) + spaced(gold);
        break;
      case PromptStyle::null_context:
        out += std::string(kAnswerCue) + spaced(gold);
        break;
      case PromptStyle::channel:
        out += gold + spaced(lm_context(demo.question));
        break;
      case PromptStyle::mcp:
        out += mcp_block(demo.question, demo.options, nullptr) +
               std::string(1, ' ') + option_symbol(demo.gold_index);
        break;
    }
    out += kDemoSeparator;
  }
  return out;
}

}  // namespace

const char* to_string(PromptStyle style) {
  switch (style) {
    case PromptStyle::lm_suffix: return "lm_suffix";
    case PromptStyle::null_context: return "null_context";
    case PromptStyle::channel: return "channel";
    case PromptStyle::mcp: return "mcp";
  }
  return "unknown";
}

std::string mcp_context(const Instance& instance) {
  validate(instance);
  return demo_prefix(instance, PromptStyle::mcp) +
         mcp_block(instance.question, instance.options, nullptr);
}

std::vector<RenderedPrompt> render_plain(const Instance& instance, PromptStyle style) {
  validate(instance);
  const std::size_t n = instance.option_count();
  std::vector<RenderedPrompt> prompts;
  prompts.reserve(n);

  if (style == PromptStyle::mcp) {
    const std::string context = mcp_context(instance);
    for (std::size_t i = 0; i < n; ++i) {
      prompts.push_back({context, spaced(std::string(1, option_symbol(i))),
                         PromptPurpose::symbol_scoring});
    }
    return prompts;
  }

  const std::string prefix = demo_prefix(instance, style);
  for (const auto& option : instance.options) {
    switch (style) {
      case PromptStyle::lm_suffix:
        prompts.push_back({prefix + lm_context(instance.question), spaced(option),
                           PromptPurpose::option_scoring});
        break;
      case PromptStyle::null_context:
        prompts.push_back({prefix + std::string(kAnswerCue), spaced(option),
                           PromptPurpose::option_scoring});
        break;
      case PromptStyle::channel:
        prompts.push_back({prefix + option, spaced(lm_context(instance.question)),
                           PromptPurpose::option_scoring});
        break;
      case PromptStyle::mcp:
        break;
    }
  }
  return prompts;
}

std::string masked_context(const Instance& instance, const Mask& mask) {
  validate(instance);
  validate(mask, instance.option_count());
  return std::string(kMaskInstruction) + "\n" + demo_prefix(instance, PromptStyle::mcp) +
         mcp_block(instance.question, instance.options, &mask);
}

std::vector<RenderedPrompt> render_masked(const Instance& instance, const Mask& mask) {
  const std::string context = masked_context(instance, mask);
  std::vector<RenderedPrompt> prompts;
  prompts.reserve(instance.option_count());
  for (std::size_t i = 0; i < instance.option_count(); ++i) {
    prompts.push_back({context, spaced(std::string(1, option_symbol(i))),
                       PromptPurpose::symbol_scoring});
  }
  return prompts;
}

}  // namespace poe
