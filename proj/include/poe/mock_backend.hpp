#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "poe/backend.hpp"

namespace poe {

// Deterministic offline backend. Lookups go to the scripted tables first;
// unscripted score requests fall back to a seeded hash so the output stays a
// pure function of (script, seed, request):
//
//   tokens  = max(1, number of whitespace-separated words in continuation)
//   key     = fnv1a64(le64(seed) || context || 0x00 || continuation)
//   lp[j]   = -8 * ((splitmix64(key + j) >> 11) * 2^-53),  j = 0..tokens-1
//
// Unscripted generation returns the fixed fallback "A".
class MockBackend final : public Backend {
 public:
  static constexpr const char* kFallbackGeneration = "A";

  explicit MockBackend(std::uint64_t seed = 0) : seed_(seed) {}

  void script_score(std::string context, std::string continuation,
                    std::vector<double> token_logprobs);
  void script_generation(std::string prompt, std::string reply);

  // When strict, unscripted requests throw CapabilityError instead of falling back.
  void set_strict(bool strict) { strict_ = strict; }

  // Script file: {"seed": int, "strict": bool,
  //   "scores": [{"context", "continuation", "logprobs": [..]}],
  //   "generations": [{"prompt", "reply"}]}
  static MockBackend from_script_file(const std::filesystem::path& path);

  ScoreResponse score_continuation(const ScoreRequest& request) override;
  std::string generate(const GenRequest& request) override;
  std::string name() const override { return "mock"; }

  // Number of score/generate calls served (scripted or not).
  std::size_t call_count() const { return calls_.load(); }
  std::uint64_t seed() const { return seed_; }

  MockBackend(const MockBackend& other)
      : seed_(other.seed_),
        strict_(other.strict_),
        scores_(other.scores_),
        generations_(other.generations_) {}

 private:
  std::uint64_t seed_;
  bool strict_ = false;
  std::map<std::pair<std::string, std::string>, std::vector<double>> scores_;
  std::map<std::string, std::string> generations_;
  std::atomic<std::size_t> calls_{0};
};

// Hash primitives behind the fallback path.
std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);
std::vector<double> mock_fallback_logprobs(std::uint64_t seed, const std::string& context,
                                           const std::string& continuation);

}  // namespace poe
