#include "poe/scorers.hpp"

#include "poe/errors.hpp"
#include "poe/templates.hpp"

namespace poe {
namespace {

template <typename Fn>
OptionScores annotated(const Instance& instance, Fn&& fn) {
  try {
    return fn();
  } catch (Error& e) {
    e.add_context("instance '" + instance.id + "'");
    throw;
  }
}

double summed(Backend& backend, const RenderedPrompt& prompt) {
  return backend.score_continuation({prompt.context, prompt.continuation}).total();
}

OptionScores summed_pass(const std::vector<RenderedPrompt>& prompts, Backend& backend,
                         const char* name) {
  OptionScores out{{}, name};
  out.values.reserve(prompts.size());
  for (const auto& prompt : prompts) out.values.emplace_back(summed(backend, prompt));
  return out;
}

}  // namespace

const char* to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::lm: return "lm";
    case ScorerKind::avg: return "avg";
    case ScorerKind::calibration: return "calibration";
    case ScorerKind::channel: return "channel";
    case ScorerKind::mcp: return "mcp";
  }
  return "unknown";
}

ScorerKind parse_scorer_kind(std::string_view name) {
  for (auto kind : {ScorerKind::lm, ScorerKind::avg, ScorerKind::calibration,
                    ScorerKind::channel, ScorerKind::mcp}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown scorer '" + std::string(name) +
                    "' (expected lm|avg|calibration|channel|mcp)");
}

OptionScores score_lm(const Instance& instance, Backend& backend) {
  return annotated(instance, [&] {
    return summed_pass(render_plain(instance, PromptStyle::lm_suffix), backend, "lm");
  });
}

OptionScores score_avg(const Instance& instance, Backend& backend) {
  return annotated(instance, [&] {
    OptionScores out{{}, "avg"};
    for (const auto& prompt : render_plain(instance, PromptStyle::lm_suffix)) {
      const ScoreResponse response =
          backend.score_continuation({prompt.context, prompt.continuation});
      if (response.token_count() == 0) {
        throw BackendContractError("backend returned zero continuation tokens");
      }
      out.values.emplace_back(response.total() / static_cast<double>(response.token_count()));
    }
    return out;
  });
}

OptionScores score_calibration(const Instance& instance, Backend& backend) {
  return annotated(instance, [&] {
    const auto contextual = render_plain(instance, PromptStyle::lm_suffix);
    const auto null_context = render_plain(instance, PromptStyle::null_context);
    OptionScores out{{}, "calibration"};
    for (std::size_t i = 0; i < contextual.size(); ++i) {
      out.values.emplace_back(summed(backend, contextual[i]) - summed(backend, null_context[i]));
    }
    return out;
  });
}

OptionScores score_channel(const Instance& instance, Backend& backend) {
  return annotated(instance, [&] {
    return summed_pass(render_plain(instance, PromptStyle::channel), backend, "channel");
  });
}

OptionScores score_mcp(const Instance& instance, Backend& backend,
                       const std::optional<Mask>& mask) {
  return annotated(instance, [&] {
    if (!mask) return summed_pass(render_plain(instance, PromptStyle::mcp), backend, "mcp");
    const auto prompts = render_masked(instance, *mask);
    OptionScores out{{}, "mcp_masked"};
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      out.values.push_back(mask->keeps(i) ? Score(summed(backend, prompts[i]))
                                          : Score::eliminated());
    }
    return out;
  });
}

OptionScores score(ScorerKind kind, const Instance& instance, Backend& backend) {
  switch (kind) {
    case ScorerKind::lm: return score_lm(instance, backend);
    case ScorerKind::avg: return score_avg(instance, backend);
    case ScorerKind::calibration: return score_calibration(instance, backend);
    case ScorerKind::channel: return score_channel(instance, backend);
    case ScorerKind::mcp: return score_mcp(instance, backend);
  }
  throw InvalidInput("unknown scorer kind");
}

std::vector<RenderedPrompt> scorer_prompts(ScorerKind kind, const Instance& instance) {
  switch (kind) {
    case ScorerKind::lm:
    case ScorerKind::avg:
      return render_plain(instance, PromptStyle::lm_suffix);
    case ScorerKind::calibration: {
      auto contextual = render_plain(instance, PromptStyle::lm_suffix);
      auto null_context = render_plain(instance, PromptStyle::null_context);
      std::vector<RenderedPrompt> out;
      for (std::size_t i = 0; i < contextual.size(); ++i) {
        out.push_back(contextual[i]);
        out.push_back(null_context[i]);
      }
      return out;
    }
    case ScorerKind::channel:
      return render_plain(instance, PromptStyle::channel);
    case ScorerKind::mcp:
      return render_plain(instance, PromptStyle::mcp);
  }
  return {};
}

}  // namespace poe
