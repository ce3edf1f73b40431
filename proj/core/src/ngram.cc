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

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "parallel.h"
#include "ticlens/error.h"

namespace ticlens {

std::string join_ngram(const std::vector<std::string>& terms) {
  std::string key;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) key.push_back(kNgramSeparator);
    key += terms[i];
  }
  return key;
}

std::vector<std::string> split_ngram(std::string_view key) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = key.find(kNgramSeparator, pos);
    out.emplace_back(key.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

void NgramStats::add_document(const TermSequence& seq) {
  ++doc_count;
  std::array<std::unordered_set<std::string>, kMaxNgramOrder> seen;
  const auto& terms = seq.terms;
  for (std::size_t s = 0; s < seq.sentence_starts.size(); ++s) {
    const std::size_t b = seq.sentence_starts[s];
    const std::size_t e = s + 1 < seq.sentence_starts.size()
                              ? seq.sentence_starts[s + 1]
                              : terms.size();
    for (std::size_t i = b; i < e; ++i) {
      std::string key;
      for (int n = 1; n <= kMaxNgramOrder && i + n <= e; ++n) {
        if (n > 1) key.push_back(kNgramSeparator);
        key += terms[i + n - 1];
        ++counts[n - 1][key];
        ++total_ngrams[n - 1];
        seen[n - 1].insert(key);
      }
    }
  }
  for (int n = 0; n < kMaxNgramOrder; ++n) {
    for (const auto& key : seen[n]) ++doc_freq[n][key];
  }
}

void NgramStats::merge(const NgramStats& other) {
  for (int n = 0; n < kMaxNgramOrder; ++n) {
    for (const auto& [k, v] : other.counts[n]) counts[n][k] += v;
    for (const auto& [k, v] : other.doc_freq[n]) doc_freq[n][k] += v;
    total_ngrams[n] += other.total_ngrams[n];
  }
  doc_count += other.doc_count;
}

std::uint64_t NgramStats::count(int n, const std::string& key) const {
  const auto& m = counts[n - 1];
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

std::uint64_t NgramStats::document_frequency(int n, const std::string& key) const {
  const auto& m = doc_freq[n - 1];
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

NgramStats build_ngram_stats(const Corpus& corpus, Language language,
                             const SegmentationLexicon* seg_lexicon,
                             int threads) {
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].language == language) indices.push_back(i);
  }
  if (indices.empty()) {
    throw ValidationError("corpus " + corpus.source_path() + " has no \"" +
                          std::string(to_string(language)) + "\" responses");
  }
  std::vector<NgramStats> parts(internal::chunk_count(indices.size(), threads));
  internal::parallel_chunks(
      indices.size(), threads,
      [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        for (std::size_t k = begin; k < end; ++k) {
          const auto& rec = corpus[indices[k]];
          const auto tokens = tokenize(rec.text, rec.language, seg_lexicon);
          const auto sentences = split_sentences(rec.text, rec.language);
          parts[chunk].add_document(
              extract_terms(tokens, sentences, /*include_numbers=*/false));
        }
      });
  NgramStats stats = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) stats.merge(parts[i]);
  if (stats.total_ngrams[0] == 0) {
    throw ValidationError("corpus " + corpus.source_path() +
                          " has no usable tokens");
  }
  return stats;
}

std::vector<OverrepEntry> overrepresented_ngrams(const NgramStats& model,
                                                 const NgramStats& reference,
                                                 const OverrepOptions& options) {
  if (options.min_count < 1) throw ValidationError("min_count must be >= 1");
  if (!(options.min_ratio > 1.0)) throw ValidationError("min_ratio must be > 1");
  if (options.min_n < 1 || options.max_n > kMaxNgramOrder ||
      options.min_n > options.max_n) {
    throw ValidationError("n-gram order range must lie within 1..4");
  }
  if (model.total_ngrams[0] == 0 || reference.total_ngrams[0] == 0) {
    throw ValidationError("n-gram statistics are empty");
  }
  std::vector<std::pair<std::string, OverrepEntry>> found;
  const double ref_docs_adj = static_cast<double>(reference.doc_count) + 1.0;
  for (int n = options.min_n; n <= options.max_n; ++n) {
    const std::uint64_t model_total = model.total_ngrams[n - 1];
    const std::uint64_t ref_total = reference.total_ngrams[n - 1];
    if (model_total == 0 || ref_total == 0) continue;
    const double eps = 1.0 / static_cast<double>(ref_total);
    for (const auto& [key, cnt] : model.counts[n - 1]) {
      if (cnt < options.min_count) continue;
      OverrepEntry e;
      e.n = n;
      e.model_count = cnt;
      e.model_rate = static_cast<double>(cnt) / static_cast<double>(model_total);
      e.ref_rate = static_cast<double>(reference.count(n, key)) /
                   static_cast<double>(ref_total);
      e.ratio = e.model_rate / (e.ref_rate + eps);
      if (e.ratio < options.min_ratio) continue;
      const double df = static_cast<double>(reference.document_frequency(n, key));
      e.weight = e.model_rate * std::log(ref_docs_adj / (df + 1.0));
      found.emplace_back(key, std::move(e));
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.second.weight != b.second.weight) return a.second.weight > b.second.weight;
    return a.first < b.first;
  });
  std::vector<OverrepEntry> out;
  out.reserve(found.size());
  for (auto& [key, e] : found) {
    e.ngram = split_ngram(key);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace ticlens
