#include "poe/cached_backend.hpp"

#include <nlohmann/json.hpp>

#include "poe/errors.hpp"

namespace poe {

using nlohmann::json;

namespace {

json request_json(const ScoreRequest& r) {
  return {{"kind", "score"}, {"context", r.context}, {"continuation", r.continuation}};
}

json request_json(const GenRequest& r) {
  return {{"kind", "generate"},
          {"prompt", r.prompt},
          {"max_tokens", r.max_tokens},
          {"temperature", r.temperature}};
}

}  // namespace

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner,
                             std::optional<std::filesystem::path> cache_file)
    : inner_(std::move(inner)) {
  if (!inner_) throw InvalidInput("cached backend needs an inner backend");
  if (cache_file) {
    if (std::filesystem::exists(*cache_file)) load(*cache_file);
    journal_.emplace(*cache_file, std::ios::app);
    if (!*journal_) throw ConfigError("cannot open cache file '" + cache_file->string() + "'");
  }
}

void CachedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json entry = json::parse(line);
      entries_[entry.at("request").dump()] = entry.at("response").dump();
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad cache entry: " +
                      e.what());
    }
  }
}

std::optional<std::string> CachedBackend::lookup(const std::string& key) {
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  return std::nullopt;
}

void CachedBackend::store(const std::string& key, const std::string& request_dump,
                          const std::string& response_dump) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(key, response_dump).second) return;
  if (journal_) {
    *journal_ << "{\"request\":" << request_dump << ",\"response\":" << response_dump << "}\n";
    journal_->flush();
  }
}

ScoreResponse CachedBackend::score_continuation(const ScoreRequest& request) {
  validate(request);
  const std::string key = request_json(request).dump();
  if (auto hit = lookup(key)) {
    return ScoreResponse{json::parse(*hit).at("token_logprobs").get<std::vector<double>>()};
  }
  ScoreResponse response = inner_->score_continuation(request);
  store(key, key, json{{"token_logprobs", response.token_logprobs}}.dump());
  return response;
}

std::string CachedBackend::generate(const GenRequest& request) {
  validate(request);
  const std::string key = request_json(request).dump();
  if (auto hit = lookup(key)) return json::parse(*hit).at("text").get<std::string>();
  std::string text = inner_->generate(request);
  store(key, key, json{{"text", text}}.dump());
  return text;
}

std::size_t CachedBackend::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t CachedBackend::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

std::size_t CachedBackend::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace poe
