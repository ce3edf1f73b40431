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

#ifndef TICLENS_TOKENIZE_H_
#define TICLENS_TOKENIZE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ticlens/language.h"

namespace ticlens {

enum class TokenKind { kWord, kCjk, kNumber, kPunct };

std::string_view to_string(TokenKind kind);

// A token is a byte span [start, end) of the source text. Tokens are sorted,
// non-overlapping, and only whitespace lies between them.
struct Token {
  std::string surface;
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  TokenKind kind = TokenKind::kWord;

  friend bool operator==(const Token&, const Token&) = default;
};

// Sentence byte span, trimmed of surrounding whitespace, terminator included.
struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

// Word list for greedy longest-match segmentation of CJK runs.
class SegmentationLexicon {
 public:
  SegmentationLexicon() = default;
  // Throws ValidationError on empty entries or entries with whitespace.
  explicit SegmentationLexicon(const std::vector<std::string>& words);

  // One word per line; '#' starts a comment line.
  static SegmentationLexicon load(const std::filesystem::path& path);
  static SegmentationLexicon parse(std::istream& in, const std::string& source);

  bool contains(const std::string& word) const { return entries_.contains(word); }
  std::size_t max_code_points() const { return max_code_points_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::unordered_set<std::string> entries_;
  std::size_t max_code_points_ = 0;
};

struct TokenizeInfo {
  // Set when Chinese text was segmented without a lexicon.
  bool per_character_fallback = false;
};

// English: Unicode default word boundaries, punctuation as separate tokens.
// Chinese: CJK runs segmented by greedy forward longest match against
// `seg_lexicon` (single code points when nothing matches or no lexicon is
// given); non-CJK stretches follow the English rules.
std::vector<Token> tokenize(std::string_view text, Language language,
                            const SegmentationLexicon* seg_lexicon = nullptr,
                            TokenizeInfo* info = nullptr);

// Terminators are . ! ? and their full-width forms. An ASCII terminator in
// English text ends a sentence only before whitespace or end of text, so
// "3.14" and "e.g.x" stay intact.
std::vector<SentenceSpan> split_sentences(std::string_view text,
                                          Language language);

constexpr bool is_lexical(TokenKind kind) { return kind != TokenKind::kPunct; }

// Case-folded lexical terms with sentence boundaries, the input to every
// frequency statistic. sentence_starts holds the index of the first term of
// each sentence that contributed at least one term.
struct TermSequence {
  std::vector<std::string> terms;
  std::vector<std::uint32_t> sentence_starts;
};

TermSequence extract_terms(const std::vector<Token>& tokens,
                           const std::vector<SentenceSpan>& sentences,
                           bool include_numbers);

}  // namespace ticlens

#endif  // TICLENS_TOKENIZE_H_
