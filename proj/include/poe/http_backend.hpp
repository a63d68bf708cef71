#pragma once

#include <chrono>
#include <string>

#include "poe/backend.hpp"

namespace poe {

struct HttpBackendConfig {
  // e.g. "http://127.0.0.1:8000"; a trailing "/v1" is accepted.
  std::string base_url;
  std::string model;
  std::string api_key;  // sent as "Authorization: Bearer <key>" when non-empty
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  int logprobs = 1;
};

// OpenAI-compatible client.
//
// Scoring posts {model, prompt: context+continuation, max_tokens: 0,
// echo: true, logprobs} to /v1/completions and keeps the echoed tokens whose
// span reaches past the context (character offsets, as reported in
// `text_offset`). Generation posts a single user message to
// /v1/chat/completions. Transport failures and 408/429/5xx responses are
// retried with exponential backoff; after the last attempt a TransportError
// is thrown. Other 4xx responses and missing logprob fields raise
// CapabilityError.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  ScoreResponse score_continuation(const ScoreRequest& request) override;
  std::string generate(const GenRequest& request) override;
  std::string name() const override { return "http(" + config_.model + ")"; }

 private:
  std::string post_json(const std::string& endpoint, const std::string& body);

  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

// Number of Unicode code points in a UTF-8 string (invalid bytes count as one each).
std::size_t utf8_length(const std::string& text);

}  // namespace poe
