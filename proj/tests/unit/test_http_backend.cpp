#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "poe/errors.hpp"
#include "poe/http_backend.hpp"

using namespace poe;
using nlohmann::json;

namespace {

// Splits on spaces, each token carrying its leading space, offsets in code points.
json echo_logprobs(const std::string& prompt) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < prompt.size();) {
    std::size_t j = i + 1;
    while (j < prompt.size() && prompt[j] != ' ') ++j;
    tokens.push_back(prompt.substr(i, j - i));
    i = j;
  }
  json lp = {{"tokens", json::array()}, {"token_logprobs", json::array()},
             {"text_offset", json::array()}};
  std::size_t offset = 0;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    lp["tokens"].push_back(tokens[k]);
    lp["token_logprobs"].push_back(k == 0 ? json(nullptr) : json(-0.5 * static_cast<double>(k)));
    lp["text_offset"].push_back(offset);
    offset += utf8_length(tokens[k]);
  }
  return lp;
}

class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      last_auth = req.get_header_value("Authorization");
      if (fail_first > 0) {
        --fail_first;
        res.status = fail_status;
        return;
      }
      if (reject) {
        res.status = 400;
        res.set_content(R"({"error":"logprobs not supported"})", "application/json");
        return;
      }
      const json body = json::parse(req.body);
      last_body = body;
      json choice = {{"text", body.at("prompt")}};
      if (with_logprobs) choice["logprobs"] = echo_logprobs(body.at("prompt"));
      res.set_content(json{{"choices", {choice}}}.dump(), "application/json");
    });
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      ++requests;
      const json body = json::parse(req.body);
      last_body = body;
      const std::string content = body.at("messages").at(0).at("content");
      res.set_content(
          json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + content}}}}}}}
              .dump(),
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  HttpBackendConfig config(const std::string& suffix = "") const {
    HttpBackendConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + suffix;
    c.model = "fake-model";
    c.timeout = std::chrono::milliseconds(2000);
    c.initial_backoff = std::chrono::milliseconds(1);
    return c;
  }

  std::atomic<int> requests{0};
  int fail_first = 0;
  int fail_status = 503;
  bool reject = false;
  bool with_logprobs = true;
  std::string last_auth;
  json last_body;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("utf8_length counts code points") {
  CHECK(utf8_length("") == 0);
  CHECK(utf8_length("abc") == 3);
  CHECK(utf8_length("caf\xc3\xa9") == 4);
  CHECK(utf8_length("\xe2\x82\xac \xf0\x9f\x98\x80") == 3);
}

TEST_CASE("http scoring keeps only the echoed continuation tokens") {
  FakeServer fake;
  HttpBackend backend(fake.config());
  // tokens: "q" " is:" " red" " fox" -> continuation covers the last two
  const auto r = backend.score_continuation({"q is:", " red fox"});
  CHECK(r.token_logprobs == std::vector<double>{-1.0, -1.5});
  CHECK(fake.last_body == json{{"model", "fake-model"},
                               {"prompt", "q is: red fox"},
                               {"max_tokens", 0},
                               {"echo", true},
                               {"logprobs", 1}});
  CHECK(fake.last_auth.empty());
}

TEST_CASE("http scoring counts offsets in characters") {
  FakeServer fake;
  HttpBackend backend(fake.config("/v1"));
  const auto r = backend.score_continuation({"caf\xc3\xa9 na\xc3\xafve", " ol\xc3\xa9"});
  CHECK(r.token_logprobs == std::vector<double>{-1.0});
}

TEST_CASE("a token straddling the boundary counts toward the continuation") {
  FakeServer fake;
  HttpBackend backend(fake.config());
  // tokens: "ab" " cd" -> " cd" starts inside the context "ab c"
  const auto r = backend.score_continuation({"ab c", "d"});
  CHECK(r.token_logprobs == std::vector<double>{-0.5});
}

TEST_CASE("bearer token is sent when configured") {
  FakeServer fake;
  auto cfg = fake.config();
  cfg.api_key = "sk-test";
  HttpBackend(cfg).score_continuation({"x", " y"});
  CHECK(fake.last_auth == "Bearer sk-test");
}

TEST_CASE("retryable statuses are retried and then surface as transport errors") {
  FakeServer fake;
  fake.fail_first = 2;
  HttpBackend backend(fake.config());
  CHECK(backend.score_continuation({"x", " y"}).token_count() == 1);
  CHECK(fake.requests == 3);

  fake.requests = 0;
  fake.fail_first = 10;
  fake.fail_status = 429;
  CHECK_THROWS_AS(backend.score_continuation({"x", " y"}), TransportError);
  CHECK(fake.requests == 3);
}

TEST_CASE("unreachable server is a transport error") {
  HttpBackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.model = "m";
  cfg.max_attempts = 2;
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::milliseconds(500);
  CHECK_THROWS_AS(HttpBackend(cfg).score_continuation({"x", " y"}), TransportError);
}

TEST_CASE("client errors and missing logprobs are capability errors") {
  FakeServer fake;
  HttpBackend backend(fake.config());
  fake.reject = true;
  CHECK_THROWS_AS(backend.score_continuation({"x", " y"}), CapabilityError);
  CHECK(fake.requests == 1);
  fake.reject = false;
  fake.with_logprobs = false;
  CHECK_THROWS_AS(backend.score_continuation({"x", " y"}), CapabilityError);
}

TEST_CASE("generation goes through chat completions") {
  FakeServer fake;
  HttpBackend backend(fake.config());
  CHECK(backend.generate({"Pick one", 16, 0.0}) == "echo: Pick one");
  CHECK(fake.last_body.at("max_tokens") == 16);
  CHECK(fake.last_body.at("temperature") == 0.0);
  CHECK(fake.last_body.at("model") == "fake-model");
}

TEST_CASE("bad configuration is rejected up front") {
  HttpBackendConfig cfg;
  cfg.base_url = "127.0.0.1:8000";
  cfg.model = "m";
  CHECK_THROWS_AS(HttpBackend{cfg}, ConfigError);
  cfg.base_url = "http://127.0.0.1:8000";
  cfg.model = "";
  CHECK_THROWS_AS(HttpBackend{cfg}, ConfigError);
}
