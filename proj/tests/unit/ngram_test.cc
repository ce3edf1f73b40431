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

#include "ticlens/ngram.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"
#include "ticlens/error.h"

namespace ticlens {
namespace {

using testing::Gen;
using testing::record;

NgramStats stats_of(const std::vector<std::string>& texts, Language lang = Language::kEn) {
  std::vector<ResponseRecord> recs;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    recs.push_back(record("r" + std::to_string(i), texts[i], lang));
  }
  return build_ngram_stats(Corpus(recs, "mem"), lang);
}

std::string key(std::initializer_list<const char*> terms) {
  std::vector<std::string> v(terms.begin(), terms.end());
  return join_ngram(v);
}

// Unigram-only stats with the given counts and document frequencies.
NgramStats unigrams(const std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>>& rows,
                    std::uint64_t total, std::uint64_t docs) {
  NgramStats s;
  for (const auto& [k, c, df] : rows) {
    s.counts[0][k] = c;
    s.doc_freq[0][k] = df;
  }
  s.total_ngrams[0] = total;
  s.doc_count = docs;
  return s;
}

TEST(NgramKey, JoinSplitRoundTrip) {
  const std::vector<std::string> terms = {"it's", "important", "to"};
  EXPECT_EQ(split_ngram(join_ngram(terms)), terms);
}

TEST(BuildNgramStats, SingleResponse) {
  const auto s = stats_of({"a b a"});
  EXPECT_EQ(s.count(1, "a"), 2u);
  EXPECT_EQ(s.count(1, "b"), 1u);
  EXPECT_EQ(s.count(2, key({"a", "b"})), 1u);
  EXPECT_EQ(s.count(2, key({"b", "a"})), 1u);
  EXPECT_EQ(s.counts[1].size(), 2u);
  EXPECT_EQ(s.total_ngrams[0], 3u);
  EXPECT_EQ(s.total_ngrams[1], 2u);
  EXPECT_EQ(s.count(3, key({"a", "b", "a"})), 1u);
}

TEST(BuildNgramStats, DocumentFrequency) {
  const auto s = stats_of({"a.", "b."});
  EXPECT_EQ(s.doc_count, 2u);
  EXPECT_EQ(s.document_frequency(1, "a"), 1u);
  EXPECT_EQ(stats_of({"a a.", "a b."}).document_frequency(1, "a"), 2u);
}

TEST(BuildNgramStats, NgramsStopAtSentenceBreaks) {
  const auto s = stats_of({"x. y"});
  EXPECT_EQ(s.total_ngrams[1], 0u);
  EXPECT_TRUE(s.counts[1].empty());
}

TEST(BuildNgramStats, FoldsCaseAndDropsNumbersAndPunctuation) {
  const auto s = stats_of({"Delve, delve 42 DELVE!"});
  EXPECT_EQ(s.count(1, "delve"), 3u);
  EXPECT_EQ(s.total_ngrams[0], 3u);
  EXPECT_EQ(s.count(1, "42"), 0u);
}

TEST(BuildNgramStats, NoUsableTokensIsError) {
  EXPECT_THROW(stats_of({"... !!! 12"}), ValidationError);
  // No record of the requested language.
  EXPECT_THROW(build_ngram_stats(Corpus({record("a", "hello")}, "mem"), Language::kZh),
               ValidationError);
}

TEST(BuildNgramStats, ThreadCountDoesNotChangeStats) {
  Gen g(3);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  std::vector<ResponseRecord> recs;
  for (int i = 0; i < 300; ++i) {
    std::string t;
    for (std::size_t k = 0, n = 1 + g.below(20); k < n; ++k) {
      t += g.pick(words) + (g.coin(0.2) ? ". " : " ");
    }
    recs.push_back(record("r" + std::to_string(i), t));
  }
  const Corpus c(recs, "mem");
  EXPECT_EQ(build_ngram_stats(c, Language::kEn, nullptr, 1),
            build_ngram_stats(c, Language::kEn, nullptr, 3));
}

TEST(Overrep, UnseenInReferenceRatioTen) {
  // model_rate = 10/1000 = 0.01; reference has 1000 unigrams and lacks g.
  const auto model = unigrams({{"g", 10, 5}, {"other", 990, 20}}, 1000, 20);
  const auto ref = unigrams({{"other", 1000, 50}}, 1000, 50);
  const auto out = overrepresented_ngrams(model, ref, {.min_count = 1, .min_ratio = 2.0});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].ngram, std::vector<std::string>{"g"});
  EXPECT_NEAR(out[0].ratio, 10.0, 1e-9);
  EXPECT_NEAR(out[0].model_rate, 0.01, 1e-12);
  EXPECT_DOUBLE_EQ(out[0].ref_rate, 0.0);
  EXPECT_NEAR(out[0].weight, 0.01 * std::log(51.0 / 1.0), 1e-12);
  EXPECT_EQ(out[0].model_count, 10u);
}

TEST(Overrep, DelveRatioFiveHundred) {
  const auto model = unigrams({{"delve", 10, 10}, {"the", 990, 100}}, 1000, 100);
  const auto ref = unigrams({{"delve", 1, 1}, {"the", 99999, 900}}, 100000, 1000);
  const auto out = overrepresented_ngrams(model, ref, {.min_count = 5, .min_ratio = 5.0});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].ngram[0], "delve");
  EXPECT_NEAR(out[0].ratio, 500.0, 1e-6);
  EXPECT_NEAR(out[0].weight, 0.01 * std::log(1001.0 / 2.0), 1e-12);
}

TEST(Overrep, EqualRatesExcluded) {
  const auto model = unigrams({{"x", 100, 50}, {"y", 900, 90}}, 1000, 100);
  const auto ref = unigrams({{"x", 10000, 5000}, {"y", 90000, 9000}}, 100000, 10000);
  EXPECT_TRUE(overrepresented_ngrams(model, ref, {.min_count = 1, .min_ratio = 2.0}).empty());
}

TEST(Overrep, MinCountGatesAndOrderWithoutReferenceIsSkipped) {
  const auto model = stats_of({"a b c d", "a b c d", "a b"});
  const auto ref = unigrams({{"zz", 100, 10}}, 100, 10);
  const auto out = overrepresented_ngrams(model, ref, {.min_count = 3, .min_ratio = 2.0});
  ASSERT_EQ(out.size(), 2u);
  for (const auto& e : out) EXPECT_EQ(e.n, 1);
  // Equal weights fall back to n-gram order.
  EXPECT_EQ(out[0].ngram[0], "a");
  EXPECT_EQ(out[1].ngram[0], "b");
}

TEST(OverrepProperty, DuplicatingModelResponsesKeepsRatios) {
  Gen g(17);
  const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "eps", "zeta"};
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> texts, ref_texts;
    for (int i = 0; i < 20; ++i) {
      std::string t, r;
      for (std::size_t k = 0, n = 3 + g.below(10); k < n; ++k) t += g.pick(words) + " ";
      for (std::size_t k = 0, n = 3 + g.below(10); k < n; ++k) r += g.pick(words) + " ";
      texts.push_back(t);
      ref_texts.push_back(r);
    }
    auto doubled = texts;
    doubled.insert(doubled.end(), texts.begin(), texts.end());
    const auto ref = stats_of(ref_texts);
    const OverrepOptions opt{.min_count = 1, .min_ratio = 1.01};
    const auto a = overrepresented_ngrams(stats_of(texts), ref, opt);
    auto b = overrepresented_ngrams(stats_of(doubled), ref, opt);
    // Doubling may admit entries that were just under min_count; compare the shared set.
    std::map<std::pair<int, std::vector<std::string>>, double> rb;
    for (const auto& e : b) rb[{e.n, e.ngram}] = e.ratio;
    for (const auto& e : a) {
      auto it = rb.find({e.n, e.ngram});
      ASSERT_NE(it, rb.end());
      EXPECT_NEAR(it->second, e.ratio, 1e-9 * e.ratio);
    }
  }
}

TEST(NgramProperty, MergeIsAssociativeAndCommutative) {
  Gen g(11);
  const std::vector<std::string> words = {"p", "q", "r", "s"};
  auto random_stats = [&] {
    std::vector<std::string> texts;
    for (std::size_t i = 0, n = 1 + g.below(5); i < n; ++i) {
      std::string t = "p ";
      for (std::size_t k = 0, m = g.below(12); k < m; ++k) t += g.pick(words) + (g.coin(0.2) ? ". " : " ");
      texts.push_back(t);
    }
    return stats_of(texts);
  };
  for (int round = 0; round < 300; ++round) {
    const auto a = random_stats(), b = random_stats(), c = random_stats();
    NgramStats ab = a;
    ab.merge(b);
    NgramStats ba = b;
    ba.merge(a);
    EXPECT_EQ(ab, ba);
    NgramStats ab_c = ab;
    ab_c.merge(c);
    NgramStats bc = b;
    bc.merge(c);
    NgramStats a_bc = a;
    a_bc.merge(bc);
    EXPECT_EQ(ab_c, a_bc);
    for (int n = 0; n < kMaxNgramOrder; ++n) {
      std::uint64_t sum = 0;
      for (const auto& [k, v] : ab_c.counts[n]) {
        sum += v;
        ASSERT_GE(v, 1u);
        ASSERT_LE(ab_c.doc_freq[n].at(k), ab_c.doc_count);
      }
      ASSERT_EQ(sum, ab_c.total_ngrams[n]);
    }
  }
}

}  // namespace
}  // namespace ticlens
