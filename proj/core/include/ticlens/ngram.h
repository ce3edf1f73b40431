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

#ifndef TICLENS_NGRAM_H_
#define TICLENS_NGRAM_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ticlens/corpus.h"
#include "ticlens/tokenize.h"

namespace ticlens {

inline constexpr int kMaxNgramOrder = 4;

// N-gram keys are the folded terms joined by U+001F, which sorts below every
// printable character, so key order equals term-tuple order.
inline constexpr char kNgramSeparator = '\x1f';

std::string join_ngram(const std::vector<std::string>& terms);
std::vector<std::string> split_ngram(std::string_view key);

// Occurrence and document counts for n = 1..4. Index 0 holds unigrams.
struct NgramStats {
  std::array<std::unordered_map<std::string, std::uint64_t>, kMaxNgramOrder> counts;
  std::array<std::unordered_map<std::string, std::uint64_t>, kMaxNgramOrder> doc_freq;
  std::array<std::uint64_t, kMaxNgramOrder> total_ngrams{};
  std::uint64_t doc_count = 0;

  // Adds one response. N-grams never cross sentence boundaries.
  void add_document(const TermSequence& terms);
  // Associative and commutative.
  void merge(const NgramStats& other);

  std::uint64_t count(int n, const std::string& key) const;
  std::uint64_t document_frequency(int n, const std::string& key) const;

  friend bool operator==(const NgramStats&, const NgramStats&) = default;
};

// Counts folded word/CJK terms (numbers and punctuation excluded) over the
// records of `language`. Throws ValidationError when nothing is counted.
NgramStats build_ngram_stats(const Corpus& corpus, Language language,
                             const SegmentationLexicon* seg_lexicon = nullptr,
                             int threads = 1);

struct OverrepEntry {
  std::vector<std::string> ngram;
  int n = 1;
  double model_rate = 0.0;
  double ref_rate = 0.0;
  double ratio = 0.0;
  double weight = 0.0;
  std::uint64_t model_count = 0;
};

struct OverrepOptions {
  std::uint64_t min_count = 5;
  double min_ratio = 5.0;
  int min_n = 1;
  int max_n = kMaxNgramOrder;
};

// For each model n-gram g with count >= min_count:
//   ratio  = model_rate / (ref_rate + 1 / ref_total[n])
//   weight = model_rate * ln((ref_docs + 1) / (ref_df(g) + 1))
// Entries with ratio >= min_ratio, sorted by weight desc then n-gram.
// Orders with no reference n-grams are skipped.
std::vector<OverrepEntry> overrepresented_ngrams(const NgramStats& model,
                                                 const NgramStats& reference,
                                                 const OverrepOptions& options);

}  // namespace ticlens

#endif  // TICLENS_NGRAM_H_
