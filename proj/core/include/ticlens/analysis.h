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

#ifndef TICLENS_ANALYSIS_H_
#define TICLENS_ANALYSIS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ticlens/corpus.h"
#include "ticlens/lexicon.h"
#include "ticlens/metrics.h"
#include "ticlens/semcluster.h"
#include "ticlens/tokenize.h"
#include "ticlens/vti.h"

namespace ticlens {

enum class GroupField { kModel, kLanguage, kTask, kPromptType, kTurn, kTemperature };
std::string_view to_string(GroupField f);
std::optional<GroupField> parse_group_field(std::string_view s);
// Comma-separated list; throws ValidationError on unknown or repeated names.
std::vector<GroupField> parse_group_fields(std::string_view s);

// One concrete field value. Turn and temperature compare numerically.
struct KeyPart {
  GroupField field = GroupField::kModel;
  std::string text;
  double number = 0.0;
  bool numeric = false;

  friend bool operator==(const KeyPart& a, const KeyPart& b) {
    return a.field == b.field && a.text == b.text;
  }
  friend bool operator<(const KeyPart& a, const KeyPart& b);
};

struct GroupKey {
  std::vector<KeyPart> parts;

  // "model=gpt,turn=3"
  std::string label() const;
  const KeyPart* find(GroupField f) const;
  friend bool operator==(const GroupKey&, const GroupKey&) = default;
  friend bool operator<(const GroupKey& a, const GroupKey& b);
};

// Value of `field` on `record`, or nullopt when the optional field is unset.
std::optional<KeyPart> key_part(const ResponseRecord& record, GroupField field);

struct AnalysisRow {
  GroupKey key;
  MetricBundle metrics;
  double vti = 0.0;  // NaN when a component is undefined
  bool low_confidence = false;
};

struct Provenance {
  std::string corpus_path;
  std::string corpus_hash;
  std::string lexicon_hash;
  VtiWeights weights;
};

struct AnalysisTable {
  std::vector<GroupField> group_by;
  std::vector<AnalysisRow> rows;  // sorted by key, one per distinct key
  Provenance provenance;
  std::size_t dropped_records = 0;  // records lacking a group-by field
};

struct AggregateOptions {
  VtiWeights weights;
  std::size_t min_n = 20;
  MetricOptions metrics;
  const SegmentationLexicon* seg_lexicon = nullptr;
  int threads = 1;
  Provenance provenance;
};

// scans[i] belongs to corpus[i]. Throws ValidationError on an empty
// group_by list or a scan count mismatch.
AnalysisTable aggregate(const Corpus& corpus, const std::vector<ResponseScan>& scans,
                        const std::vector<GroupField>& group_by,
                        const AggregateOptions& options);

// Same result as scan_corpus followed by aggregate, tokenizing each
// response once.
AnalysisTable scan_and_aggregate(const Corpus& corpus, const MatcherSet& matchers,
                                 const std::vector<GroupField>& group_by,
                                 const AggregateOptions& options);

struct TurnRate {
  int turn = 0;
  double tic_rate = 0.0;
  std::uint64_t n = 0;
};

struct TurnProfile {
  std::optional<std::string> model;  // filter, if any
  std::vector<TurnRate> per_turn;    // turns 1..T, contiguous
  double slope = 0.0;                // OLS over (turn, rate)
  // 100 * (rate_T - rate_1) / rate_1 over the pooled rates; unset when
  // rate_1 is 0.
  std::optional<double> pct_increase;
  // The same quantity per model, and its mean over the models where it is
  // defined.
  std::map<std::string, std::optional<double>> per_model_pct;
  std::optional<double> mean_model_pct;
};

// Throws ValidationError when fewer than two turns are present, turns are
// not contiguous from 1, or the model filter matches nothing.
TurnProfile turn_accumulation(const Corpus& corpus,
                              const std::vector<ResponseScan>& scans,
                              const std::optional<std::string>& model = std::nullopt);

struct CrossLingualRow {
  std::string model;
  double syc_en = 0.0;
  double syc_zh = 0.0;
  std::optional<double> delta_pct;  // unset when syc_en is 0
  double tic_rate_en = 0.0;
  double tic_rate_zh = 0.0;
};

struct CrossLingualReport {
  std::vector<CrossLingualRow> rows;  // sorted by model
  std::optional<double> mean_delta_pct;
  std::vector<std::string> excluded_models;  // missing one language
};

// Requires a table grouped by exactly {model, language}.
CrossLingualReport cross_lingual_delta(const AnalysisTable& table);

struct TemperatureRate {
  double temperature = 0.0;
  double tic_rate = 0.0;
  std::uint64_t n = 0;
};

struct TemperatureProfile {
  std::vector<TemperatureRate> rates;  // ascending temperature
  std::size_t dropped_records = 0;     // records without a temperature
};

// Throws ValidationError when no record has a temperature or fewer than two
// distinct values are present.
TemperatureProfile temperature_profile(const Corpus& corpus,
                                       const std::vector<ResponseScan>& scans);

// Clusters the folded surfaces of all matches, one language at a time (en
// first), and stores each match's cluster id. Ids are unique across
// languages.
std::vector<TicCluster> assign_clusters(const Corpus& corpus,
                                        std::vector<ResponseScan>& scans,
                                        EmbeddingProvider& provider,
                                        const ClusterOptions& options = {});

struct CalibrationSet {
  std::vector<CalibrationItem> items;
  std::vector<std::string> response_ids;  // parallel to items
  std::size_t unmatched_scores = 0;       // scored ids absent from the corpus
};

// Per-response VTI components (tic and syc indicators, the response's MATTR,
// its within-response phrase repetition) paired with the human score of
// every scored response, in corpus order. Responses without lexical tokens
// are skipped.
CalibrationSet calibration_items(const Corpus& corpus,
                                 const std::vector<ResponseScan>& scans,
                                 const std::map<std::string, double>& human_scores,
                                 const MetricOptions& metrics = {},
                                 const SegmentationLexicon* seg_lexicon = nullptr);

// Ordinary least-squares slope of ys on xs. Throws when xs is constant.
double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace ticlens

#endif  // TICLENS_ANALYSIS_H_
