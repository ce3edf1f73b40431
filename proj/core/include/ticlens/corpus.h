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

#ifndef TICLENS_CORPUS_H_
#define TICLENS_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ticlens/language.h"

namespace ticlens {

// One model response plus the metadata the analyses group by.
struct ResponseRecord {
  std::string id;
  std::string model;
  Language language = Language::kEn;
  std::string task;
  std::optional<std::string> prompt_type;
  int turn = 1;
  std::optional<double> temperature;
  std::string text;
  // Unrecognized JSON fields, kept as a compact JSON object ("" when none)
  // so that re-serialization is lossless.
  std::string extra;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

// Immutable, ordered collection of responses. Record order is ingestion order
// and every downstream result is reported in that order.
class Corpus {
 public:
  Corpus() = default;
  // Throws ValidationError naming the first duplicated id.
  Corpus(std::vector<ResponseRecord> records, std::string source_path);

  const std::vector<ResponseRecord>& records() const { return records_; }
  const std::string& source_path() const { return source_path_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const ResponseRecord& operator[](std::size_t i) const { return records_[i]; }

  std::optional<std::size_t> index_of(std::string_view id) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<ResponseRecord> records_;
  std::string source_path_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct RejectedLine {
  std::size_t line = 0;  // 1-based
  std::string reason;

  friend bool operator==(const RejectedLine&, const RejectedLine&) = default;
};

struct CorpusLoad {
  Corpus corpus;
  std::vector<RejectedLine> rejects;
};

// Malformed or invalid lines are skipped and listed in `rejects`; blank lines
// are ignored. A duplicated id is fatal (ValidationError). An unreadable file
// raises IoError.
CorpusLoad load_corpus(const std::filesystem::path& path);
CorpusLoad parse_corpus(std::istream& in, std::string source);

// Human-readable rejects listing, one "line N: reason" per entry.
std::string format_rejects(const std::vector<RejectedLine>& rejects);

std::string to_json_line(const ResponseRecord& record);
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

enum class Dimension {
  kNaturalness,
  kHelpfulness,
  kSycophancyPerception,
  kTrust,
  kAnnoyance,
  kRepetitiveness,
};

std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view s);

// One Likert rating (1..5) of one response by one rater.
struct AnnotationRecord {
  std::string response_id;
  std::string rater_id;
  Dimension dimension = Dimension::kNaturalness;
  int score = 0;

  friend bool operator==(const AnnotationRecord&,
                         const AnnotationRecord&) = default;
};

// All errors are fatal and cite the 1-based line number.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
std::vector<AnnotationRecord> parse_annotations(std::istream& in,
                                                const std::string& source);

// FNV-1a over the raw file bytes, as 16 hex digits.
std::string file_content_hash(const std::filesystem::path& path);

}  // namespace ticlens

#endif  // TICLENS_CORPUS_H_
