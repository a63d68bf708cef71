#pragma once

#include <string_view>
#include <vector>

#include "poe/core.hpp"

namespace poe {

// Fixed, task-agnostic prompt pieces.
inline constexpr std::string_view kAnswerCue = "the answer is:";
inline constexpr std::string_view kMaskInstruction =
    "Select the most suitable option to answer the question. Ignore [MASK] options.";
inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kDemoSeparator = "\n\n";

enum class PromptStyle {
  lm_suffix,     // "<q> the answer is:" -> " <option>"
  null_context,  // "the answer is:" -> " <option>"
  channel,       // "<option>" -> " <q> the answer is:"
  mcp,           // "Question: <q>\nA. ..\nAnswer:" -> " A"
};

const char* to_string(PromptStyle style);

// One prompt per option (per symbol for mcp), in option order. Demonstrations
// are rendered in the same style with their gold continuation filled in and
// prepended, each followed by a blank line.
std::vector<RenderedPrompt> render_plain(const Instance& instance, PromptStyle style);

// Step-2 prompt: instruction line, then the mcp block with every eliminated
// option body replaced by "[MASK]". Letters are never relabeled and one
// prompt per option is returned regardless of the mask.
std::vector<RenderedPrompt> render_masked(const Instance& instance, const Mask& mask);

// The shared context of render_masked (used verbatim as a generation prompt).
std::string masked_context(const Instance& instance, const Mask& mask);

// The shared context of render_plain(mcp).
std::string mcp_context(const Instance& instance);

}  // namespace poe
