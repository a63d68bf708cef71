#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "poe/backend.hpp"

namespace poe {

// Exact-match response cache around any backend. Keys are the full request
// serialized as canonical JSON, so any byte difference (whitespace included)
// is a miss. With a cache file, prior entries are loaded on construction and
// every new entry is appended as one JSON line:
//   {"request": {...}, "response": {...}}
// Safe for concurrent callers; two threads missing on the same key may both
// reach the inner backend.
class CachedBackend final : public Backend {
 public:
  explicit CachedBackend(std::shared_ptr<Backend> inner,
                         std::optional<std::filesystem::path> cache_file = std::nullopt);

  ScoreResponse score_continuation(const ScoreRequest& request) override;
  std::string generate(const GenRequest& request) override;
  std::string name() const override { return "cached(" + inner_->name() + ")"; }

  std::size_t hits() const;
  std::size_t misses() const;
  std::size_t size() const;

 private:
  std::optional<std::string> lookup(const std::string& key);
  void store(const std::string& key, const std::string& request_json,
             const std::string& response_json);
  void load(const std::filesystem::path& path);

  std::shared_ptr<Backend> inner_;
  mutable std::mutex mutex_;
  // key -> serialized response object
  std::unordered_map<std::string, std::string> entries_;
  std::optional<std::ofstream> journal_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace poe
