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

#include "ticlens/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>

#include "ticlens/error.h"
#include "ticlens/text.h"

namespace ticlens {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_nonempty(std::span<const ResponseScan> scans, const char* what) {
  if (scans.empty()) {
    throw ValidationError(std::string(what) + ": empty response list");
  }
}

bool has_syc(const ResponseScan& s) {
  return std::any_of(s.matches.begin(), s.matches.end(), [](const TicMatch& m) {
    return is_sycophancy_category(m.resolved_category);
  });
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

// Bigrams within sentences, keyed as "a\x1fb".
template <class Fn>
void for_each_bigram(const TermSequence& seq, Fn&& fn) {
  const auto& t = seq.terms;
  for (std::size_t s = 0; s < seq.sentence_starts.size(); ++s) {
    const std::size_t b = seq.sentence_starts[s];
    const std::size_t e =
        s + 1 < seq.sentence_starts.size() ? seq.sentence_starts[s + 1] : t.size();
    for (std::size_t i = b; i + 1 < e; ++i) {
      std::string key;
      key.reserve(t[i].size() + t[i + 1].size() + 1);
      key += t[i];
      key.push_back('\x1f');
      key += t[i + 1];
      fn(std::move(key));
    }
  }
}

}  // namespace

double tic_rate(std::span<const ResponseScan> scans) {
  require_nonempty(scans, "tic_rate");
  const auto hit = std::count_if(scans.begin(), scans.end(), [](const ResponseScan& s) {
    return !s.matches.empty();
  });
  return static_cast<double>(hit) / static_cast<double>(scans.size());
}

double syc_score(std::span<const ResponseScan> scans) {
  require_nonempty(scans, "syc_score");
  const auto hit = std::count_if(scans.begin(), scans.end(), has_syc);
  return static_cast<double>(hit) / static_cast<double>(scans.size());
}

std::string phrase_identity(const TicMatch& m) {
  if (m.cluster_id) return "cluster:" + std::to_string(*m.cluster_id);
  return "phrase:" + text::fold(m.entry->phrase);
}

double rep_rate(std::span<const ResponseScan> scans) {
  require_nonempty(scans, "rep_rate");
  std::unordered_set<std::string> ids;
  std::uint64_t total = 0;
  for (const auto& s : scans) {
    for (const auto& m : s.matches) {
      ids.insert(phrase_identity(m));
      ++total;
    }
  }
  if (total == 0) return 0.0;
  return 1.0 - static_cast<double>(ids.size()) / static_cast<double>(total);
}

WindowSums mattr_sums(std::span<const std::string> terms, std::size_t window) {
  if (window == 0) throw ValidationError("mattr: window must be > 0");
  WindowSums sums;
  if (terms.empty()) return sums;
  // Intern to dense ids so the sliding window works on a count array.
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::uint32_t> seq;
  seq.reserve(terms.size());
  for (const auto& t : terms) {
    auto [it, _] = ids.emplace(t, static_cast<std::uint32_t>(ids.size()));
    seq.push_back(it->second);
  }
  std::vector<std::uint32_t> counts(ids.size(), 0);
  if (seq.size() < window) {
    sums.distinct_sum = ids.size();
    sums.window_tokens = seq.size();
    return sums;
  }
  std::uint64_t distinct = 0;
  for (std::size_t i = 0; i < window; ++i) {
    if (counts[seq[i]]++ == 0) ++distinct;
  }
  sums.distinct_sum = distinct;
  for (std::size_t i = window; i < seq.size(); ++i) {
    if (--counts[seq[i - window]] == 0) --distinct;
    if (counts[seq[i]]++ == 0) ++distinct;
    sums.distinct_sum += distinct;
  }
  sums.window_tokens = static_cast<std::uint64_t>(seq.size() - window + 1) * window;
  return sums;
}

double mattr(std::span<const std::string> terms, std::size_t window) {
  if (terms.empty()) throw ValidationError("mattr: empty token list");
  const WindowSums s = mattr_sums(terms, window);
  return static_cast<double>(s.distinct_sum) / static_cast<double>(s.window_tokens);
}

DiversityStats diversity_suite(const TermSequence& seq) {
  if (seq.terms.empty()) throw ValidationError("diversity_suite: empty token list");
  std::unordered_map<std::string_view, std::uint64_t> types;
  for (const auto& t : seq.terms) ++types[t];
  std::uint64_t hapax = 0;
  for (const auto& [_, c] : types) hapax += (c == 1);
  std::unordered_set<std::string> bigram_types;
  std::uint64_t bigrams = 0;
  for_each_bigram(seq, [&](std::string key) {
    bigram_types.insert(std::move(key));
    ++bigrams;
  });
  DiversityStats d;
  d.ttr = static_cast<double>(types.size()) / static_cast<double>(seq.terms.size());
  d.hapax_ratio = static_cast<double>(hapax) / static_cast<double>(types.size());
  d.distinct1 = d.ttr;
  d.distinct2 = bigrams == 0 ? 1.0
                             : static_cast<double>(bigram_types.size()) /
                                   static_cast<double>(bigrams);
  return d;
}

Composition CompositionCounts::percentages() const {
  const std::uint64_t n = total();
  if (n == 0) return {kNaN, kNaN, kNaN};
  Composition c;
  c.filler_pct = 100.0 * static_cast<double>(filler) / static_cast<double>(n);
  c.tic_pct = 100.0 * static_cast<double>(tic) / static_cast<double>(n);
  // Derived so the three always sum to 100 up to one rounding step.
  c.content_pct = 100.0 - c.filler_pct - c.tic_pct;
  return c;
}

CompositionCounts composition_counts(const std::vector<Token>& tokens,
                                     const std::vector<TicMatch>& matches) {
  // Best (lowest) precedence covering each token, -1 when uncovered.
  std::vector<int> best(tokens.size(), -1);
  std::vector<bool> filler(tokens.size(), false);
  for (const auto& m : matches) {
    auto it = std::lower_bound(tokens.begin(), tokens.end(), m.start,
                               [](const Token& t, std::uint32_t s) { return t.end <= s; });
    const int prec = category_precedence(m.resolved_category);
    for (; it != tokens.end() && it->start < m.end; ++it) {
      const auto i = static_cast<std::size_t>(it - tokens.begin());
      if (best[i] < 0 || prec < best[i]) {
        best[i] = prec;
        filler[i] = is_filler_category(m.resolved_category);
      }
    }
  }
  CompositionCounts c;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (best[i] < 0) {
      ++c.content;
    } else if (filler[i]) {
      ++c.filler;
    } else {
      ++c.tic;
    }
  }
  return c;
}

Composition token_composition(const std::vector<Token>& tokens,
                              const std::vector<TicMatch>& matches) {
  if (tokens.empty()) throw ValidationError("token_composition: zero tokens");
  return composition_counts(tokens, matches).percentages();
}

MetricAccumulator::MetricAccumulator(MetricOptions options) : options_(options) {
  if (options_.window == 0) throw ValidationError("MATTR window must be > 0");
}

void MetricAccumulator::add(std::size_t record_index,
                            const std::vector<Token>& tokens,
                            const std::vector<SentenceSpan>& sentences,
                            const ResponseScan& scan) {
  ++n_responses_;
  if (!scan.matches.empty()) ++n_with_tic_;
  if (has_syc(scan)) ++n_with_syc_;
  total_matches_ += scan.matches.size();
  for (const auto& m : scan.matches) identities_.insert(phrase_identity(m));

  const TermSequence seq = extract_terms(tokens, sentences, options_.include_numbers);
  const WindowSums ws = mattr_sums(seq.terms, options_.window);
  const CompositionCounts cc = composition_counts(tokens, scan.matches);
  composition_.merge(cc);

  if (options_.averaging == Averaging::kPerResponse) {
    if (!seq.terms.empty()) {
      const DiversityStats d = diversity_suite(seq);
      per_response_.push_back({record_index,
                               ratio(ws.distinct_sum, ws.window_tokens), d.ttr,
                               d.hapax_ratio, d.distinct2, cc.percentages()});
    }
    return;
  }
  windows_.distinct_sum += ws.distinct_sum;
  windows_.window_tokens += ws.window_tokens;
  for (const auto& t : seq.terms) ++unigrams_[t];
  unigram_total_ += seq.terms.size();
  for_each_bigram(seq, [&](std::string key) {
    ++bigrams_[std::move(key)];
    ++bigram_total_;
  });
}

void MetricAccumulator::merge(const MetricAccumulator& o) {
  n_responses_ += o.n_responses_;
  n_with_tic_ += o.n_with_tic_;
  n_with_syc_ += o.n_with_syc_;
  total_matches_ += o.total_matches_;
  identities_.insert(o.identities_.begin(), o.identities_.end());
  for (const auto& [k, v] : o.unigrams_) unigrams_[k] += v;
  unigram_total_ += o.unigram_total_;
  for (const auto& [k, v] : o.bigrams_) bigrams_[k] += v;
  bigram_total_ += o.bigram_total_;
  windows_.distinct_sum += o.windows_.distinct_sum;
  windows_.window_tokens += o.windows_.window_tokens;
  composition_.merge(o.composition_);
  per_response_.insert(per_response_.end(), o.per_response_.begin(),
                       o.per_response_.end());
}

MetricBundle MetricAccumulator::finish() const {
  if (n_responses_ == 0) throw ValidationError("metrics: empty group");
  MetricBundle b;
  b.n_responses = n_responses_;
  b.tic_rate = ratio(n_with_tic_, n_responses_);
  b.syc_score = ratio(n_with_syc_, n_responses_);
  b.rep_rate = total_matches_ == 0
                   ? 0.0
                   : 1.0 - static_cast<double>(identities_.size()) /
                               static_cast<double>(total_matches_);

  if (options_.averaging == Averaging::kPerResponse) {
    auto rows = per_response_;
    std::sort(rows.begin(), rows.end(), [](const PerResponse& a, const PerResponse& c) {
      return a.record_index < c.record_index;
    });
    if (rows.empty()) {
      b.mattr = b.ttr = b.hapax_ratio = b.distinct1 = b.distinct2 = kNaN;
      b.composition = composition_.percentages();
      return b;
    }
    double m = 0, t = 0, h = 0, d2 = 0, fp = 0, tp = 0;
    for (const auto& r : rows) {
      m += r.mattr;
      t += r.ttr;
      h += r.hapax;
      d2 += r.distinct2;
      fp += r.composition.filler_pct;
      tp += r.composition.tic_pct;
    }
    const double n = static_cast<double>(rows.size());
    b.mattr = m / n;
    b.ttr = b.distinct1 = t / n;
    b.hapax_ratio = h / n;
    b.distinct2 = d2 / n;
    b.composition.filler_pct = fp / n;
    b.composition.tic_pct = tp / n;
    b.composition.content_pct = 100.0 - b.composition.filler_pct - b.composition.tic_pct;
    return b;
  }

  b.mattr = ratio(windows_.distinct_sum, windows_.window_tokens);
  b.ttr = ratio(unigrams_.size(), unigram_total_);
  b.distinct1 = b.ttr;
  std::uint64_t hapax = 0;
  for (const auto& [_, c] : unigrams_) hapax += (c == 1);
  b.hapax_ratio = ratio(hapax, unigrams_.size());
  b.distinct2 = unigram_total_ == 0 ? kNaN
                : bigram_total_ == 0 ? 1.0
                                     : ratio(bigrams_.size(), bigram_total_);
  b.composition = composition_.percentages();
  return b;
}

}  // namespace ticlens
