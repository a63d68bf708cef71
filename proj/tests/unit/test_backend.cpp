#include <doctest.h>

#include <cmath>
#include <memory>
#include <thread>

#include "poe/cached_backend.hpp"
#include "poe/errors.hpp"
#include "poe/mock_backend.hpp"
#include "support/fixtures.hpp"

using namespace poe;
namespace t = poe::testing;

namespace {

// Written from the documented formula, in one pass over the concatenated key.
std::vector<double> oracle_fallback(std::uint64_t seed, const std::string& context,
                                    const std::string& continuation) {
  std::string bytes(8, '\0');
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(seed >> (8 * i));
  bytes += context;
  bytes.push_back('\0');
  bytes += continuation;
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ULL;

  std::size_t words = 0;
  bool in = false;
  for (char c : continuation) {
    const bool sp = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!sp && !in) ++words;
    in = !sp;
  }
  if (words == 0) words = 1;

  std::vector<double> out;
  for (std::size_t j = 0; j < words; ++j) {
    std::uint64_t z = h + j + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    out.push_back(-8.0 * std::ldexp(static_cast<double>(z >> 11), -53));
  }
  return out;
}

class CountingBackend final : public Backend {
 public:
  ScoreResponse score_continuation(const ScoreRequest& r) override {
    ++score_calls;
    return ScoreResponse{{-static_cast<double>(r.continuation.size())}};
  }
  std::string generate(const GenRequest& r) override {
    ++gen_calls;
    return "reply to " + r.prompt;
  }
  std::string name() const override { return "counting"; }
  int score_calls = 0;
  int gen_calls = 0;
};

}  // namespace

TEST_CASE("splitmix64 reference values") {
  // First outputs of the reference generator seeded with 0.
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  state += 0x9e3779b97f4a7c15ULL;
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("mock fallback matches the documented hash recipe") {
  MockBackend mock(42);
  for (const auto& [ctx, cont] : std::vector<std::pair<std::string, std::string>>{
           {"q the answer is:", " three word option"},
           {"", "   "},
           {"Question: x\nA. y\nAnswer:", " A"},
           {"ctx", "\tsplit\nacross lines "}}) {
    const auto got = mock.score_continuation({ctx, cont}).token_logprobs;
    CHECK(got == oracle_fallback(42, ctx, cont));
    for (double v : got) {
      CHECK(v <= 0.0);
      CHECK(v > -8.0);
    }
  }
  CHECK(MockBackend(1).score_continuation({"c", " x"}) !=
        MockBackend(2).score_continuation({"c", " x"}));
}

TEST_CASE("mock script takes precedence and strict mode refuses unscripted calls") {
  MockBackend mock(0);
  mock.script_score("ctx", " opt", {-1.0, -2.0});
  mock.script_generation("p", "B.");
  CHECK(mock.score_continuation({"ctx", " opt"}).total() == doctest::Approx(-3.0));
  CHECK(mock.generate({"p"}) == "B.");
  CHECK(mock.generate({"other"}) == MockBackend::kFallbackGeneration);
  CHECK(mock.call_count() == 3);

  mock.set_strict(true);
  CHECK_THROWS_AS(mock.score_continuation({"ctx", " other"}), CapabilityError);
  CHECK_THROWS_AS(mock.generate({"other"}), CapabilityError);
}

TEST_CASE("empty continuation and bad generation settings are rejected") {
  MockBackend mock;
  CHECK_THROWS_AS(mock.score_continuation({"ctx", ""}), InvalidInput);
  CHECK_THROWS_AS(mock.generate({"p", 0, 0.0}), InvalidInput);
  CHECK_THROWS_AS(mock.generate({"p", 8, -0.5}), InvalidInput);
}

TEST_CASE("mock script file round trip") {
  const auto dir = t::fresh_temp_dir("mock_script");
  const auto path = dir / "script.json";
  std::ofstream(path) << R"({"seed": 9, "strict": true,
    "scores": [{"context": "c", "continuation": " a", "logprobs": [-0.5]}],
    "generations": [{"prompt": "p", "reply": "C"}]})";
  MockBackend mock = MockBackend::from_script_file(path);
  CHECK(mock.seed() == 9);
  CHECK(mock.score_continuation({"c", " a"}).token_logprobs == std::vector<double>{-0.5});
  CHECK(mock.generate({"p"}) == "C");
  CHECK_THROWS_AS(mock.score_continuation({"c", " b"}), CapabilityError);
  CHECK_THROWS_AS(MockBackend::from_script_file(dir / "missing.json"), ConfigError);
}

TEST_CASE("cache serves repeats without reaching the inner backend") {
  auto inner = std::make_shared<CountingBackend>();
  CachedBackend cache(inner);
  const ScoreRequest req{"ctx", " opt"};
  const auto first = cache.score_continuation(req);
  for (int i = 0; i < 5; ++i) CHECK(cache.score_continuation(req) == first);
  CHECK(inner->score_calls == 1);
  CHECK(cache.hits() == 5);
  CHECK(cache.misses() == 1);

  // Any byte difference is a different request.
  cache.score_continuation({"ctx ", " opt"});
  cache.score_continuation({"ctx", "  opt"});
  CHECK(inner->score_calls == 3);

  CHECK(cache.generate({"p", 8, 0.0}) == "reply to p");
  CHECK(cache.generate({"p", 8, 0.0}) == "reply to p");
  cache.generate({"p", 9, 0.0});
  CHECK(inner->gen_calls == 2);
}

TEST_CASE("cache journal reloads across instances") {
  const auto dir = t::fresh_temp_dir("cache_journal");
  const auto path = dir / "cache.jsonl";
  {
    CachedBackend cache(std::make_shared<CountingBackend>(), path);
    cache.score_continuation({"a", " b"});
    cache.generate({"prompt"});
  }
  auto inner = std::make_shared<CountingBackend>();
  CachedBackend reloaded(inner, path);
  CHECK(reloaded.size() == 2);
  CHECK(reloaded.score_continuation({"a", " b"}).token_logprobs == std::vector<double>{-2.0});
  CHECK(reloaded.generate({"prompt"}) == "reply to prompt");
  CHECK(inner->score_calls == 0);
  CHECK(inner->gen_calls == 0);

  std::ofstream(dir / "bad.jsonl") << "{not json\n";
  CHECK_THROWS_AS(CachedBackend(std::make_shared<CountingBackend>(), dir / "bad.jsonl"),
                  DataError);
}

TEST_CASE("cached mock is indistinguishable from the bare mock") {
  auto mock = std::make_shared<MockBackend>(5);
  CachedBackend cache(mock);
  MockBackend bare(5);
  for (int i = 0; i < 50; ++i) {
    const ScoreRequest r{"context " + std::to_string(i % 7), " option " + std::to_string(i)};
    CHECK(cache.score_continuation(r) == bare.score_continuation(r));
  }
}

TEST_CASE("cache is safe under concurrent callers") {
  auto inner = std::make_shared<MockBackend>(3);
  CachedBackend cache(inner);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&cache] {
      for (int i = 0; i < 200; ++i) cache.score_continuation({"c", " o" + std::to_string(i % 20)});
    });
  }
  for (auto& th : threads) th.join();
  CHECK(cache.size() == 20);
  CHECK(cache.hits() + cache.misses() == 1600);
}
