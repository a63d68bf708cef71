#include "poe/mock_backend.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "poe/errors.hpp"

namespace poe {

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::size_t word_count(const std::string& text) {
  std::size_t words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

std::string le64(std::uint64_t v) {
  std::string out(8, '\0');
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return out;
}

}  // namespace

std::vector<double> mock_fallback_logprobs(std::uint64_t seed, const std::string& context,
                                           const std::string& continuation) {
  const std::size_t tokens = std::max<std::size_t>(1, word_count(continuation));
  const std::uint64_t key =
      fnv1a64(continuation, fnv1a64(std::string(1, '\0'), fnv1a64(context, fnv1a64(le64(seed)))));
  std::vector<double> out;
  out.reserve(tokens);
  for (std::size_t j = 0; j < tokens; ++j) {
    const double unit = static_cast<double>(splitmix64(key + j) >> 11) * 0x1.0p-53;
    out.push_back(-8.0 * unit);
  }
  return out;
}

void MockBackend::script_score(std::string context, std::string continuation,
                               std::vector<double> token_logprobs) {
  scores_[{std::move(context), std::move(continuation)}] = std::move(token_logprobs);
}

void MockBackend::script_generation(std::string prompt, std::string reply) {
  generations_[std::move(prompt)] = std::move(reply);
}

MockBackend MockBackend::from_script_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mock script '" + path.string() + "': " + e.what());
  }
  try {
    MockBackend mock(doc.value("seed", std::uint64_t{0}));
    mock.set_strict(doc.value("strict", false));
    for (const auto& entry : doc.value("scores", nlohmann::json::array())) {
      mock.script_score(entry.at("context").get<std::string>(),
                        entry.at("continuation").get<std::string>(),
                        entry.at("logprobs").get<std::vector<double>>());
    }
    for (const auto& entry : doc.value("generations", nlohmann::json::array())) {
      mock.script_generation(entry.at("prompt").get<std::string>(),
                             entry.at("reply").get<std::string>());
    }
    return mock;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mock script '" + path.string() + "': " + e.what());
  }
}

ScoreResponse MockBackend::score_continuation(const ScoreRequest& request) {
  validate(request);
  ++calls_;
  if (auto it = scores_.find({request.context, request.continuation}); it != scores_.end()) {
    return ScoreResponse{it->second};
  }
  if (strict_) {
    throw CapabilityError("strict mock has no script for continuation '" +
                          request.continuation + "'");
  }
  return ScoreResponse{mock_fallback_logprobs(seed_, request.context, request.continuation)};
}

std::string MockBackend::generate(const GenRequest& request) {
  validate(request);
  ++calls_;
  if (auto it = generations_.find(request.prompt); it != generations_.end()) {
    return it->second;
  }
  if (strict_) throw CapabilityError("strict mock has no script for generation prompt");
  return kFallbackGeneration;
}

}  // namespace poe
