#pragma once

// Test-only helpers. Prompt strings here are written out independently of
// src/templates.cpp so scripted mocks do not reuse the code under test.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "poe/core.hpp"

namespace poe::testing {

inline Instance make_instance(std::string id, std::string question,
                              std::vector<std::string> options, std::size_t gold) {
  Instance instance;
  instance.id = std::move(id);
  instance.question = std::move(question);
  instance.options = std::move(options);
  instance.gold_index = gold;
  instance.task_name = "fixture";
  return instance;
}

inline Instance siqa_sample() {
  return make_instance(
      "siqa-kendall",
      "Kendall was searching for ring with their eyes closed. They hit something. Why did "
      "Kendall do this?",
      {"kendall who has searching his ring", "kendall who has wanted to close their eyes",
       "find the rings"},
      2);
}

inline std::string oracle_lm_context(const std::string& q) { return q + " the answer is:"; }

inline std::string oracle_mcp_context(const std::string& q, const std::vector<std::string>& opts,
                                      const std::vector<int>& keep = {}) {
  std::string s = "Question: " + q + "\n";
  for (std::size_t i = 0; i < opts.size(); ++i) {
    const bool kept = keep.empty() || keep[i] == 1;
    s += std::string(1, static_cast<char>('A' + i)) + ". " + (kept ? opts[i] : "[MASK]") + "\n";
  }
  return s + "Answer:";
}

inline std::string oracle_masked_context(const std::string& q,
                                         const std::vector<std::string>& opts,
                                         const std::vector<int>& keep) {
  return "Select the most suitable option to answer the question. Ignore [MASK] options.\n" +
         oracle_mcp_context(q, opts, keep);
}

inline std::string oracle_symbol(std::size_t i) {
  return " " + std::string(1, static_cast<char>('A' + i));
}

// Random valid instance with 2..max_options options.
inline Instance random_instance(std::mt19937_64& rng, std::size_t index,
                                std::size_t max_options = 6) {
  std::uniform_int_distribution<std::size_t> count(2, max_options);
  std::uniform_int_distribution<int> word(0, 9999);
  const std::size_t n = count(rng);
  std::vector<std::string> options;
  for (std::size_t i = 0; i < n; ++i) {
    options.push_back("option " + std::to_string(word(rng)) + " w" + std::to_string(i));
  }
  std::uniform_int_distribution<std::size_t> gold(0, n - 1);
  return make_instance("r" + std::to_string(index), "question " + std::to_string(word(rng)) + "?",
                       std::move(options), gold(rng));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path fresh_temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("poe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path test_dir() { return POE_TEST_DIR; }

}  // namespace poe::testing
