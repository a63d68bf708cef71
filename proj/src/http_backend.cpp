#include "poe/http_backend.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "poe/errors.hpp"

namespace poe {

using nlohmann::json;

std::size_t utf8_length(const std::string& text) {
  std::size_t count = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

namespace {

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string snippet(const std::string& body) {
  return body.size() > 200 ? body.substr(0, 200) + "..." : body;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("backend url '" + config_.base_url + "' needs a scheme (http://...)");
  }
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (path_prefix_.size() >= 3 && path_prefix_.compare(path_prefix_.size() - 3, 3, "/v1") == 0) {
    path_prefix_.resize(path_prefix_.size() - 3);
  }
  if (config_.model.empty()) throw ConfigError("http backend needs a model name");
  if (config_.max_attempts < 1) throw ConfigError("http backend needs max_attempts >= 1");
}

std::string HttpBackend::post_json(const std::string& endpoint, const std::string& body) {
  const std::string path = path_prefix_ + endpoint;
  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.initial_backoff * (1 << (attempt - 1)));

    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 200 && result->status < 300) return result->body;
    if (retryable_status(result->status)) {
      last_error = "HTTP " + std::to_string(result->status) + ": " + snippet(result->body);
      continue;
    }
    throw CapabilityError("POST " + path + " rejected with HTTP " +
                          std::to_string(result->status) + ": " + snippet(result->body));
  }
  throw TransportError("POST " + path + " failed after " +
                       std::to_string(config_.max_attempts) + " attempts; last: " + last_error);
}

ScoreResponse HttpBackend::score_continuation(const ScoreRequest& request) {
  validate(request);
  const std::string prompt = request.context + request.continuation;
  const json body = {{"model", config_.model},
                     {"prompt", prompt},
                     {"max_tokens", 0},
                     {"echo", true},
                     {"logprobs", config_.logprobs}};
  const std::string raw = post_json("/v1/completions", body.dump());

  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::exception& e) {
    throw BackendContractError(std::string("completions response is not JSON: ") + e.what());
  }
  const json* lp = nullptr;
  try {
    lp = &doc.at("choices").at(0).at("logprobs");
  } catch (const json::exception&) {
    throw CapabilityError("completions response carries no logprobs");
  }
  if (!lp->is_object() || !lp->contains("tokens") || !lp->contains("token_logprobs") ||
      !lp->contains("text_offset")) {
    throw CapabilityError("completions response lacks tokens/token_logprobs/text_offset");
  }
  const json& tokens = lp->at("tokens");
  const json& logprobs = lp->at("token_logprobs");
  const json& offsets = lp->at("text_offset");
  if (tokens.size() != logprobs.size() || tokens.size() != offsets.size()) {
    throw BackendContractError("logprob arrays have mismatched lengths");
  }

  // Offsets count characters; keep every token that overlaps the continuation.
  const std::size_t context_chars = utf8_length(request.context);
  const std::size_t prompt_chars = utf8_length(prompt);
  ScoreResponse response;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::size_t start = offsets[i].get<std::size_t>();
    const std::size_t end = start + utf8_length(tokens[i].get<std::string>());
    if (end <= context_chars || start >= prompt_chars) continue;
    if (logprobs[i].is_null()) {
      throw BackendContractError("continuation token " + std::to_string(i) +
                                 " has no logprob (empty context?)");
    }
    response.token_logprobs.push_back(logprobs[i].get<double>());
  }
  if (response.token_logprobs.empty()) {
    throw BackendContractError("no echoed tokens cover the continuation");
  }
  return response;
}

std::string HttpBackend::generate(const GenRequest& request) {
  validate(request);
  const json body = {{"model", config_.model},
                     {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens}};
  const std::string raw = post_json("/v1/chat/completions", body.dump());
  try {
    return json::parse(raw).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendContractError(std::string("chat response has no message content: ") + e.what());
  }
}

}  // namespace poe
