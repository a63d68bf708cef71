#include "poe/backend.hpp"

#include <numeric>

#include "poe/errors.hpp"

namespace poe {

double ScoreResponse::total() const {
  return std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0);
}

void validate(const ScoreRequest& request) {
  if (request.continuation.empty()) {
    throw InvalidInput("score request has an empty continuation");
  }
}

void validate(const GenRequest& request) {
  if (request.max_tokens < 1) {
    throw InvalidInput("generation request needs max_tokens >= 1");
  }
  if (!(request.temperature >= 0.0)) {
    throw InvalidInput("generation request needs a non-negative temperature");
  }
}

}  // namespace poe
