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

#ifndef TICLENS_METRICS_H_
#define TICLENS_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ticlens/lexicon.h"
#include "ticlens/tokenize.h"

namespace ticlens {

inline constexpr std::size_t kDefaultMattrWindow = 200;

// Fraction of responses with at least one match. Throws on an empty list.
double tic_rate(std::span<const ResponseScan> scans);

// Fraction of responses with a sycophantic-opener or pseudo-empathy match.
double syc_score(std::span<const ResponseScan> scans);

// 1 - distinct phrase identities / total matches (0 when there are none).
double rep_rate(std::span<const ResponseScan> scans);

// Cluster id when clustering ran, otherwise the folded lexicon phrase.
std::string phrase_identity(const TicMatch& match);

// Moving-average type-token ratio. Falls back to plain TTR when the text is
// shorter than the window. Throws on empty input or window 0.
double mattr(std::span<const std::string> terms,
             std::size_t window = kDefaultMattrWindow);

// Integer form of MATTR: sum of distinct counts over all windows and the sum
// of window sizes. mattr = distinct_sum / window_tokens, and these pairs add
// up exactly across responses.
struct WindowSums {
  std::uint64_t distinct_sum = 0;
  std::uint64_t window_tokens = 0;
};
WindowSums mattr_sums(std::span<const std::string> terms, std::size_t window);

struct DiversityStats {
  double ttr = 0.0;
  double hapax_ratio = 0.0;
  double distinct1 = 0.0;
  // Sentence-bounded bigrams; 1 when the text has no bigram at all.
  double distinct2 = 0.0;
};

// Throws on an empty term list.
DiversityStats diversity_suite(const TermSequence& seq);

struct Composition {
  double content_pct = 0.0;
  double filler_pct = 0.0;
  double tic_pct = 0.0;
};

struct CompositionCounts {
  std::uint64_t content = 0;
  std::uint64_t filler = 0;
  std::uint64_t tic = 0;

  std::uint64_t total() const { return content + filler + tic; }
  Composition percentages() const;
  void merge(const CompositionCounts& o) {
    content += o.content;
    filler += o.filler;
    tic += o.tic;
  }
};

// Each token (of any kind) lands in exactly one bucket: the bucket of the
// highest-precedence match overlapping it, filler for filler/formulaic
// transitions, tic for every other category, content when uncovered.
CompositionCounts composition_counts(const std::vector<Token>& tokens,
                                     const std::vector<TicMatch>& matches);
// Throws on zero tokens.
Composition token_composition(const std::vector<Token>& tokens,
                              const std::vector<TicMatch>& matches);

struct MetricBundle {
  double tic_rate = 0.0;
  double mattr = 0.0;
  double ttr = 0.0;
  double hapax_ratio = 0.0;
  double distinct1 = 0.0;
  double distinct2 = 0.0;
  double rep_rate = 0.0;
  double syc_score = 0.0;
  Composition composition;
  std::uint64_t n_responses = 0;
};

enum class Averaging {
  kCorpus,       // pool counts over the group, then take ratios
  kPerResponse,  // diversity and composition averaged over responses
};

struct MetricOptions {
  std::size_t window = kDefaultMattrWindow;
  bool include_numbers = true;
  Averaging averaging = Averaging::kCorpus;
};

// Mergeable per-group state. Everything except the per-response averaging
// buffer is integral, so merge order never changes the result.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(MetricOptions options = {});

  void add(std::size_t record_index, const std::vector<Token>& tokens,
           const std::vector<SentenceSpan>& sentences, const ResponseScan& scan);
  void merge(const MetricAccumulator& other);

  std::uint64_t n_responses() const { return n_responses_; }
  // Throws when no response was added. Ratios with an empty denominator
  // (e.g. a group without lexical tokens) are NaN.
  MetricBundle finish() const;

 private:
  struct PerResponse {
    std::size_t record_index;
    double mattr, ttr, hapax, distinct2;
    Composition composition;
  };

  MetricOptions options_;
  std::uint64_t n_responses_ = 0;
  std::uint64_t n_with_tic_ = 0;
  std::uint64_t n_with_syc_ = 0;
  std::uint64_t total_matches_ = 0;
  std::unordered_set<std::string> identities_;
  std::unordered_map<std::string, std::uint64_t> unigrams_;
  std::uint64_t unigram_total_ = 0;
  std::unordered_map<std::string, std::uint64_t> bigrams_;
  std::uint64_t bigram_total_ = 0;
  WindowSums windows_;
  CompositionCounts composition_;
  std::vector<PerResponse> per_response_;
};

}  // namespace ticlens

#endif  // TICLENS_METRICS_H_
