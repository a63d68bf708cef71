#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace poe {

struct ScoreRequest {
  std::string context;
  std::string continuation;

  friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

struct ScoreResponse {
  // Natural-log probability of each continuation token, in order. Values are
  // not assumed to be <= 0.
  std::vector<double> token_logprobs;

  std::size_t token_count() const { return token_logprobs.size(); }
  double total() const;

  friend bool operator==(const ScoreResponse&, const ScoreResponse&) = default;
};

struct GenRequest {
  std::string prompt;
  int max_tokens = 64;
  double temperature = 0.0;

  friend bool operator==(const GenRequest&, const GenRequest&) = default;
};

// Throws InvalidInput on an empty continuation.
void validate(const ScoreRequest& request);
// Throws InvalidInput on max_tokens < 1 or a negative temperature.
void validate(const GenRequest& request);

// Uniform LM capability. Implementations must be callable from several
// threads at once.
class Backend {
 public:
  virtual ~Backend() = default;

  // Per-token logprobs of `continuation` given `context`. Summing and
  // normalizing is the caller's job.
  virtual ScoreResponse score_continuation(const ScoreRequest& request) = 0;

  // Raw, untrimmed completion text.
  virtual std::string generate(const GenRequest& request) = 0;

  virtual std::string name() const = 0;
};

}  // namespace poe
