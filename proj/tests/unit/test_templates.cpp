#include <doctest.h>

#include <random>

#include "poe/errors.hpp"
#include "poe/scorers.hpp"
#include "poe/templates.hpp"
#include "support/fixtures.hpp"

using namespace poe;
namespace t = poe::testing;

namespace {

std::string golden(const std::string& row, std::size_t k, const char* part) {
  return t::read_file(t::test_dir() / "golden" / "siqa_prompts" /
                      (row + "." + std::to_string(k) + "." + part + ".txt"));
}

void check_rows(const std::string& row, const std::vector<RenderedPrompt>& prompts) {
  REQUIRE(prompts.size() == 3);
  for (std::size_t k = 0; k < prompts.size(); ++k) {
    INFO(row << "." << k);
    CHECK(prompts[k].context == golden(row, k, "context"));
    CHECK(prompts[k].continuation == golden(row, k, "continuation"));
  }
}

}  // namespace

TEST_CASE("rendered prompts match the worked example byte for byte") {
  const Instance x = t::siqa_sample();
  check_rows("lm", scorer_prompts(ScorerKind::lm, x));
  check_rows("avg", scorer_prompts(ScorerKind::avg, x));
  check_rows("channel", scorer_prompts(ScorerKind::channel, x));
  check_rows("mcp", scorer_prompts(ScorerKind::mcp, x));
  check_rows("poe_elimination", render_plain(x, PromptStyle::mcp));
  check_rows("poe_prediction", render_masked(x, Mask({false, true, true})));

  const auto cal = scorer_prompts(ScorerKind::calibration, x);
  REQUIRE(cal.size() == 6);
  check_rows("calibration_contextual", {cal[0], cal[2], cal[4]});
  check_rows("calibration_null", {cal[1], cal[3], cal[5]});
}

TEST_CASE("rendering is pure") {
  const Instance x = t::siqa_sample();
  const Mask mask({true, false, true});
  CHECK(render_masked(x, mask) == render_masked(x, mask));
  CHECK(render_plain(x, PromptStyle::channel) == render_plain(x, PromptStyle::channel));
}

TEST_CASE("masked prompt never relabels and keeps one prompt per option") {
  const Instance x = t::make_instance("m", "Pick one.", {"alpha", "beta", "gamma", "delta"}, 3);
  const auto prompts = render_masked(x, Mask({false, true, false, true}));
  REQUIRE(prompts.size() == 4);
  CHECK(prompts[0].context ==
        t::oracle_masked_context("Pick one.", x.options, {0, 1, 0, 1}));
  CHECK(prompts[2].continuation == " C");
  CHECK(prompts[0].purpose == PromptPurpose::symbol_scoring);
}

TEST_CASE("property: an all-kept mask renders the plain block behind the instruction") {
  std::mt19937_64 rng(11);
  for (std::size_t i = 0; i < 200; ++i) {
    const Instance x = t::random_instance(rng, i, 26);
    const std::string masked = masked_context(x, Mask::all_kept(x.option_count()));
    CHECK(masked == std::string(kMaskInstruction) + "\n" + mcp_context(x));
    CHECK(masked.find(kMaskToken, kMaskInstruction.size()) == std::string::npos);
  }
}

TEST_CASE("more than 26 options cannot be rendered with symbols") {
  std::vector<std::string> options;
  for (int i = 0; i < 27; ++i) options.push_back("o" + std::to_string(i));
  const Instance x = t::make_instance("big", "q", options, 0);
  CHECK_THROWS_AS(render_plain(x, PromptStyle::mcp), UnsupportedSymbolRange);
  CHECK_THROWS_AS(render_masked(x, Mask::all_kept(27)), UnsupportedSymbolRange);
  CHECK_NOTHROW(render_plain(x, PromptStyle::lm_suffix));
}

TEST_CASE("demonstrations are prepended in the same style") {
  Instance x = t::make_instance("d", "Q2?", {"x", "y"}, 0);
  x.demonstrations.push_back({"Q1?", {"a", "b"}, 1});
  const auto lm = render_plain(x, PromptStyle::lm_suffix);
  CHECK(lm[0].context == "Q1? the answer is: b\n\nQ2? the answer is:");

  const auto mcp = render_plain(x, PromptStyle::mcp);
  CHECK(mcp[1].context ==
        "Question: Q1?\nA. a\nB. b\nAnswer: B\n\nQuestion: Q2?\nA. x\nB. y\nAnswer:");

  const auto masked = render_masked(x, Mask({true, false}));
  CHECK(masked[0].context ==
        std::string(kMaskInstruction) +
            "\nQuestion: Q1?\nA. a\nB. b\nAnswer: B\n\nQuestion: Q2?\nA. x\nB. [MASK]\nAnswer:");
}
