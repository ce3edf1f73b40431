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

#ifndef TICLENS_LEXICON_H_
#define TICLENS_LEXICON_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ticlens/corpus.h"
#include "ticlens/language.h"
#include "ticlens/tokenize.h"

namespace ticlens {

enum class TicCategory {
  kSycophanticOpener,
  kHedging,
  kFillerTransition,
  kEmphaticAffirmation,
  kPseudoEmpathy,
  kOverusedVocabulary,
  kFalseModesty,
  kExcessiveEmphasis,
  kFormulaicTransition,
};

inline constexpr std::array<TicCategory, 9> kAllCategories = {
    TicCategory::kSycophanticOpener,   TicCategory::kHedging,
    TicCategory::kFillerTransition,    TicCategory::kEmphaticAffirmation,
    TicCategory::kPseudoEmpathy,       TicCategory::kOverusedVocabulary,
    TicCategory::kFalseModesty,        TicCategory::kExcessiveEmphasis,
    TicCategory::kFormulaicTransition,
};

std::string_view to_string(TicCategory c);
std::optional<TicCategory> parse_category(std::string_view s);

// Position in the resolution cascade, 0 = strongest:
// sycophantic_opener > pseudo_empathy > false_modesty > excessive_emphasis >
// hedging > emphatic_affirmation > filler_transition > formulaic_transition >
// overused_vocabulary.
int category_precedence(TicCategory c);

// Categories that feed SycScore.
constexpr bool is_sycophancy_category(TicCategory c) {
  return c == TicCategory::kSycophanticOpener ||
         c == TicCategory::kPseudoEmpathy;
}

// Categories counted as filler (not tic) in token composition.
constexpr bool is_filler_category(TicCategory c) {
  return c == TicCategory::kFillerTransition ||
         c == TicCategory::kFormulaicTransition;
}

enum class PositionRule { kAnywhere, kResponseInitial, kSentenceInitial };

std::string_view to_string(PositionRule r);
std::optional<PositionRule> parse_position_rule(std::string_view s);

struct TicEntry {
  std::string phrase;
  Language language = Language::kEn;
  TicCategory category = TicCategory::kHedging;
  PositionRule position_rule = PositionRule::kAnywhere;
  bool is_vocabulary_word = false;

  friend bool operator==(const TicEntry&, const TicEntry&) = default;
};

class TicLexicon {
 public:
  TicLexicon() = default;

  // Throws ValidationError on an empty phrase or a duplicate
  // (folded phrase, language, category).
  void add(TicEntry entry);

  // JSON array of {phrase, language, category, position_rule,
  // is_vocabulary_word}. Errors cite the line of the offending entry.
  static TicLexicon load(const std::filesystem::path& path);
  static TicLexicon parse(std::string_view json_text, const std::string& source);

  const std::vector<TicEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(Language lang) const;
  std::map<std::pair<Language, TicCategory>, std::size_t> counts() const;

  std::string to_json() const;
  // FNV-1a of to_json(), 16 hex digits.
  std::string content_hash() const;

 private:
  std::vector<TicEntry> entries_;
};

// One detected tic occurrence. `entry` points into the TicMatcher that
// produced it and stays valid while any copy of that matcher is alive.
struct TicMatch {
  std::string response_id;
  const TicEntry* entry = nullptr;
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  TicCategory resolved_category = TicCategory::kHedging;
  std::optional<int> cluster_id;
};

// Immutable Aho-Corasick automaton over the case-folded phrases of one
// language. Copies share the compiled tables.
class TicMatcher {
 public:
  struct RawHit {
    std::uint32_t begin = 0;  // folded byte offsets
    std::uint32_t end = 0;
    std::uint32_t pattern = 0;
  };

  // Throws ValidationError when the lexicon has no entry for `language`.
  static TicMatcher compile(const TicLexicon& lexicon, Language language);

  Language language() const;
  const std::vector<TicEntry>& entries() const;
  std::size_t pattern_count() const;
  const std::string& pattern(std::uint32_t id) const;
  const std::vector<std::uint32_t>& pattern_entries(std::uint32_t id) const;

  // Every occurrence of every pattern in `folded` (already case folded).
  // A pattern that begins (ends) with a word character only matches where
  // the preceding (following) character is not one, so "note" never fires
  // inside "denote".
  void find_all(std::string_view folded, std::vector<RawHit>* out) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Stage-1 detection for one response: automaton hits filtered by word
// boundaries and position rules, identical spans resolved to one category,
// same-category overlaps resolved leftmost-longest. Sorted by start offset.
std::vector<TicMatch> scan_response(const TicMatcher& matcher,
                                    const ResponseRecord& record,
                                    const std::vector<Token>& tokens,
                                    const std::vector<SentenceSpan>& sentences);

struct ResponseScan {
  std::vector<TicMatch> matches;
};

// One compiled matcher per language present in a lexicon.
class MatcherSet {
 public:
  MatcherSet() = default;
  explicit MatcherSet(const TicLexicon& lexicon);

  const TicMatcher* get(Language lang) const;
  const std::string& lexicon_hash() const { return lexicon_hash_; }

 private:
  std::optional<TicMatcher> en_;
  std::optional<TicMatcher> zh_;
  std::string lexicon_hash_;
};

// Throws ValidationError if the corpus holds a language `matchers` lacks.
void require_languages(const Corpus& corpus, const MatcherSet& matchers);

// Scans every record; result[i] belongs to corpus[i]. Throws
// ValidationError if the corpus holds a language the lexicon lacks.
std::vector<ResponseScan> scan_corpus(const Corpus& corpus,
                                      const MatcherSet& matchers,
                                      const SegmentationLexicon* seg_lexicon,
                                      int threads = 1);

}  // namespace ticlens

#endif  // TICLENS_LEXICON_H_
