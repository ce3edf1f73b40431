// Copyright 2026 The TicLens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared fixtures and hand-rolled generators for the unit tests.

#ifndef TICLENS_TESTS_TEST_UTIL_H_
#define TICLENS_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <random>
#include <string>
#include <vector>

#include "ticlens/corpus.h"
#include "ticlens/lexicon.h"
#include "ticlens/tokenize.h"

namespace ticlens::testing {

inline TicEntry entry(std::string phrase, TicCategory cat,
                      PositionRule rule = PositionRule::kAnywhere,
                      Language lang = Language::kEn, bool vocab = false) {
  TicEntry e;
  e.phrase = std::move(phrase);
  e.category = cat;
  e.position_rule = rule;
  e.language = lang;
  e.is_vocabulary_word = vocab;
  return e;
}

inline TicLexicon lexicon_of(const std::vector<TicEntry>& entries) {
  TicLexicon lex;
  for (const auto& e : entries) lex.add(e);
  return lex;
}

inline ResponseRecord record(std::string id, std::string text,
                             Language lang = Language::kEn, std::string model = "m",
                             int turn = 1) {
  ResponseRecord r;
  r.id = std::move(id);
  r.text = std::move(text);
  r.language = lang;
  r.model = std::move(model);
  r.task = "general";
  r.turn = turn;
  return r;
}

inline std::vector<TicMatch> scan_text(const TicMatcher& matcher, const std::string& text,
                                       Language lang = Language::kEn) {
  const auto rec = record("r", text, lang);
  return scan_response(matcher, rec, tokenize(text, lang), split_sentences(text, lang));
}

// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  bool coin(double p = 0.5) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 rng_;
};

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ticlens_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace ticlens::testing

#endif  // TICLENS_TESTS_TEST_UTIL_H_
