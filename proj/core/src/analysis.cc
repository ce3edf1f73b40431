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

#include "ticlens/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <utility>

#include "parallel.h"
#include "ticlens/error.h"
#include "ticlens/text.h"

namespace ticlens {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using GroupMap = std::map<GroupKey, MetricAccumulator>;

std::optional<GroupKey> make_key(const ResponseRecord& rec,
                                 const std::vector<GroupField>& fields) {
  GroupKey key;
  key.parts.reserve(fields.size());
  for (GroupField f : fields) {
    auto part = key_part(rec, f);
    if (!part) return std::nullopt;
    key.parts.push_back(std::move(*part));
  }
  return key;
}

void validate_group_by(const std::vector<GroupField>& group_by) {
  if (group_by.empty()) throw ValidationError("group-by field list is empty");
  std::set<GroupField> seen(group_by.begin(), group_by.end());
  if (seen.size() != group_by.size()) {
    throw ValidationError("group-by field list repeats a field");
  }
}

bool finite_components(const MetricBundle& b) {
  return std::isfinite(b.tic_rate) && std::isfinite(b.mattr) &&
         std::isfinite(b.syc_score) && std::isfinite(b.rep_rate);
}

// Per-chunk partial maps merged in chunk order, then turned into rows.
template <class PerRecord>
AnalysisTable run_aggregation(const Corpus& corpus,
                              const std::vector<GroupField>& group_by,
                              const AggregateOptions& options, PerRecord&& per_record) {
  validate_group_by(group_by);
  const std::size_t chunks = internal::chunk_count(corpus.size(), options.threads);
  std::vector<GroupMap> partial(chunks);
  std::vector<std::size_t> dropped(chunks, 0);
  internal::parallel_chunks(corpus.size(), options.threads,
                            [&](std::size_t b, std::size_t e, std::size_t k) {
    for (std::size_t i = b; i < e; ++i) {
      auto key = make_key(corpus[i], group_by);
      if (!key) {
        ++dropped[k];
        continue;
      }
      auto it = partial[k].find(*key);
      if (it == partial[k].end()) {
        it = partial[k].emplace(std::move(*key), MetricAccumulator(options.metrics)).first;
      }
      per_record(i, it->second);
    }
  });

  GroupMap merged;
  for (auto& part : partial) {
    for (auto& [key, acc] : part) {
      auto it = merged.find(key);
      if (it == merged.end()) {
        merged.emplace(key, std::move(acc));
      } else {
        it->second.merge(acc);
      }
    }
  }

  AnalysisTable table;
  table.group_by = group_by;
  table.provenance = options.provenance;
  table.provenance.weights = options.weights;
  for (std::size_t d : dropped) table.dropped_records += d;
  for (const auto& [key, acc] : merged) {
    AnalysisRow row;
    row.key = key;
    row.metrics = acc.finish();
    row.vti = finite_components(row.metrics)
                  ? compute_vti(components_of(row.metrics), options.weights)
                  : kNaN;
    row.low_confidence = row.metrics.n_responses < options.min_n;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::optional<double> pct_change(double first, double last) {
  if (first == 0.0) return std::nullopt;
  return 100.0 * (last - first) / first;
}

}  // namespace

std::string_view to_string(GroupField f) {
  switch (f) {
    case GroupField::kModel: return "model";
    case GroupField::kLanguage: return "language";
    case GroupField::kTask: return "task";
    case GroupField::kPromptType: return "prompt_type";
    case GroupField::kTurn: return "turn";
    case GroupField::kTemperature: return "temperature";
  }
  return "?";
}

std::optional<GroupField> parse_group_field(std::string_view s) {
  for (auto f : {GroupField::kModel, GroupField::kLanguage, GroupField::kTask,
                 GroupField::kPromptType, GroupField::kTurn, GroupField::kTemperature}) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

std::vector<GroupField> parse_group_fields(std::string_view s) {
  std::vector<GroupField> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string_view name = s.substr(pos, comma - pos);
    auto f = parse_group_field(name);
    if (!f) throw ValidationError("unknown group-by field '" + std::string(name) + "'");
    if (std::find(out.begin(), out.end(), *f) != out.end()) {
      throw ValidationError("group-by field '" + std::string(name) + "' repeated");
    }
    out.push_back(*f);
    pos = comma + 1;
  }
  return out;
}

bool operator<(const KeyPart& a, const KeyPart& b) {
  if (a.field != b.field) return a.field < b.field;
  if (a.numeric && b.numeric && a.number != b.number) return a.number < b.number;
  return a.text < b.text;
}

bool operator<(const GroupKey& a, const GroupKey& b) {
  return std::lexicographical_compare(a.parts.begin(), a.parts.end(),
                                      b.parts.begin(), b.parts.end());
}

std::string GroupKey::label() const {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out.push_back(',');
    out += to_string(p.field);
    out.push_back('=');
    out += p.text;
  }
  return out;
}

const KeyPart* GroupKey::find(GroupField f) const {
  for (const auto& p : parts) {
    if (p.field == f) return &p;
  }
  return nullptr;
}

std::optional<KeyPart> key_part(const ResponseRecord& rec, GroupField field) {
  KeyPart p;
  p.field = field;
  switch (field) {
    case GroupField::kModel: p.text = rec.model; break;
    case GroupField::kLanguage: p.text = std::string(to_string(rec.language)); break;
    case GroupField::kTask: p.text = rec.task; break;
    case GroupField::kPromptType:
      if (!rec.prompt_type) return std::nullopt;
      p.text = *rec.prompt_type;
      break;
    case GroupField::kTurn:
      p.text = std::to_string(rec.turn);
      p.number = rec.turn;
      p.numeric = true;
      break;
    case GroupField::kTemperature:
      if (!rec.temperature) return std::nullopt;
      p.text = format_number(*rec.temperature);
      p.number = *rec.temperature;
      p.numeric = true;
      break;
  }
  return p;
}

AnalysisTable aggregate(const Corpus& corpus, const std::vector<ResponseScan>& scans,
                        const std::vector<GroupField>& group_by,
                        const AggregateOptions& options) {
  if (scans.size() != corpus.size()) {
    throw ValidationError("aggregate: " + std::to_string(scans.size()) +
                          " scans for " + std::to_string(corpus.size()) + " records");
  }
  return run_aggregation(corpus, group_by, options,
                         [&](std::size_t i, MetricAccumulator& acc) {
    const auto& rec = corpus[i];
    const auto tokens = tokenize(rec.text, rec.language, options.seg_lexicon);
    const auto sentences = split_sentences(rec.text, rec.language);
    acc.add(i, tokens, sentences, scans[i]);
  });
}

AnalysisTable scan_and_aggregate(const Corpus& corpus, const MatcherSet& matchers,
                                 const std::vector<GroupField>& group_by,
                                 const AggregateOptions& options) {
  require_languages(corpus, matchers);
  return run_aggregation(corpus, group_by, options,
                         [&](std::size_t i, MetricAccumulator& acc) {
    const auto& rec = corpus[i];
    const auto tokens = tokenize(rec.text, rec.language, options.seg_lexicon);
    const auto sentences = split_sentences(rec.text, rec.language);
    ResponseScan scan;
    scan.matches = scan_response(*matchers.get(rec.language), rec, tokens, sentences);
    acc.add(i, tokens, sentences, scan);
  });
}

std::vector<TicCluster> assign_clusters(const Corpus& corpus,
                                        std::vector<ResponseScan>& scans,
                                        EmbeddingProvider& provider,
                                        const ClusterOptions& options) {
  if (scans.size() != corpus.size()) {
    throw ValidationError("assign_clusters: scan count mismatch");
  }
  std::vector<TicCluster> all;
  for (Language lang : {Language::kEn, Language::kZh}) {
    std::vector<std::string> phrases;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].language != lang) continue;
      for (const auto& m : scans[i].matches) {
        phrases.push_back(text::fold(std::string_view(corpus[i].text).substr(m.start, m.end - m.start)));
      }
    }
    if (phrases.empty()) continue;
    auto clusters = cluster_tics(std::move(phrases), provider, options);
    const int offset = static_cast<int>(all.size());
    std::map<std::string, int> index;
    for (auto& c : clusters) {
      c.id += offset;
      for (const auto& p : c.member_phrases) index.emplace(p, c.id);
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].language != lang) continue;
      for (auto& m : scans[i].matches) {
        const auto folded =
            text::fold(std::string_view(corpus[i].text).substr(m.start, m.end - m.start));
        m.cluster_id = index.at(folded);
      }
    }
    all.insert(all.end(), std::make_move_iterator(clusters.begin()),
               std::make_move_iterator(clusters.end()));
  }
  return all;
}

CalibrationSet calibration_items(const Corpus& corpus,
                                 const std::vector<ResponseScan>& scans,
                                 const std::map<std::string, double>& human_scores,
                                 const MetricOptions& metrics,
                                 const SegmentationLexicon* seg_lexicon) {
  if (scans.size() != corpus.size()) {
    throw ValidationError("calibration_items: scan count mismatch");
  }
  CalibrationSet set;
  for (const auto& [id, _] : human_scores) {
    if (!corpus.index_of(id)) ++set.unmatched_scores;
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& rec = corpus[i];
    auto it = human_scores.find(rec.id);
    if (it == human_scores.end()) continue;
    const auto tokens = tokenize(rec.text, rec.language, seg_lexicon);
    const auto sentences = split_sentences(rec.text, rec.language);
    MetricAccumulator acc(metrics);
    acc.add(i, tokens, sentences, scans[i]);
    const MetricBundle b = acc.finish();
    if (!std::isfinite(b.mattr)) continue;
    set.items.push_back({components_of(b), it->second});
    set.response_ids.push_back(rec.id);
  }
  return set;
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ValidationError("ols_slope: need >= 2 paired points");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw ValidationError("ols_slope: constant x");
  return sxy / sxx;
}

TurnProfile turn_accumulation(const Corpus& corpus,
                              const std::vector<ResponseScan>& scans,
                              const std::optional<std::string>& model) {
  if (scans.size() != corpus.size()) {
    throw ValidationError("turn_accumulation: scan count mismatch");
  }
  // turn -> (responses, responses with a tic), pooled and per model.
  std::map<int, std::pair<std::uint64_t, std::uint64_t>> pooled;
  std::map<std::string, std::map<int, std::pair<std::uint64_t, std::uint64_t>>> by_model;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& rec = corpus[i];
    if (model && rec.model != *model) continue;
    const std::uint64_t hit = scans[i].matches.empty() ? 0 : 1;
    auto& p = pooled[rec.turn];
    ++p.first;
    p.second += hit;
    auto& m = by_model[rec.model][rec.turn];
    ++m.first;
    m.second += hit;
  }
  if (pooled.empty()) {
    throw ValidationError(model ? "no responses for model '" + *model + "'"
                                : std::string("empty corpus"));
  }
  if (pooled.size() < 2) throw ValidationError("turn accumulation needs >= 2 turns");
  int expect = 1;
  for (const auto& [turn, _] : pooled) {
    if (turn != expect) {
      throw ValidationError("turns are not contiguous from 1 (missing turn " +
                            std::to_string(expect) + ")");
    }
    ++expect;
  }

  TurnProfile prof;
  prof.model = model;
  std::vector<double> xs, ys;
  for (const auto& [turn, c] : pooled) {
    const double rate = static_cast<double>(c.second) / static_cast<double>(c.first);
    prof.per_turn.push_back({turn, rate, c.first});
    xs.push_back(turn);
    ys.push_back(rate);
  }
  prof.slope = ols_slope(xs, ys);
  prof.pct_increase = pct_change(ys.front(), ys.back());

  double sum = 0.0;
  int defined = 0;
  for (const auto& [name, turns] : by_model) {
    std::optional<double> pct;
    if (turns.size() >= 2 && turns.begin()->first == 1) {
      auto rate = [](const std::pair<std::uint64_t, std::uint64_t>& c) {
        return static_cast<double>(c.second) / static_cast<double>(c.first);
      };
      pct = pct_change(rate(turns.begin()->second), rate(turns.rbegin()->second));
    }
    if (pct) {
      sum += *pct;
      ++defined;
    }
    prof.per_model_pct[name] = pct;
  }
  if (defined > 0) prof.mean_model_pct = sum / defined;
  return prof;
}

CrossLingualReport cross_lingual_delta(const AnalysisTable& table) {
  const auto& g = table.group_by;
  const bool ok = g.size() == 2 &&
                  std::find(g.begin(), g.end(), GroupField::kModel) != g.end() &&
                  std::find(g.begin(), g.end(), GroupField::kLanguage) != g.end();
  if (!ok) {
    throw ValidationError("cross-lingual delta needs a table grouped by model,language");
  }
  struct Pair {
    const MetricBundle* en = nullptr;
    const MetricBundle* zh = nullptr;
  };
  std::map<std::string, Pair> models;
  for (const auto& row : table.rows) {
    const auto& m = row.key.find(GroupField::kModel)->text;
    const auto& lang = row.key.find(GroupField::kLanguage)->text;
    (lang == "en" ? models[m].en : models[m].zh) = &row.metrics;
  }
  CrossLingualReport out;
  double sum = 0.0;
  int defined = 0;
  for (const auto& [name, p] : models) {
    if (!p.en || !p.zh) {
      out.excluded_models.push_back(name);
      continue;
    }
    CrossLingualRow r;
    r.model = name;
    r.syc_en = p.en->syc_score;
    r.syc_zh = p.zh->syc_score;
    r.delta_pct = pct_change(r.syc_en, r.syc_zh);
    r.tic_rate_en = p.en->tic_rate;
    r.tic_rate_zh = p.zh->tic_rate;
    if (r.delta_pct) {
      sum += *r.delta_pct;
      ++defined;
    }
    out.rows.push_back(std::move(r));
  }
  if (defined > 0) out.mean_delta_pct = sum / defined;
  return out;
}

TemperatureProfile temperature_profile(const Corpus& corpus,
                                       const std::vector<ResponseScan>& scans) {
  if (scans.size() != corpus.size()) {
    throw ValidationError("temperature_profile: scan count mismatch");
  }
  std::map<double, std::pair<std::uint64_t, std::uint64_t>> by_temp;
  TemperatureProfile prof;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& t = corpus[i].temperature;
    if (!t) {
      ++prof.dropped_records;
      continue;
    }
    auto& c = by_temp[*t];
    ++c.first;
    c.second += scans[i].matches.empty() ? 0 : 1;
  }
  if (by_temp.empty()) throw ValidationError("no record carries a temperature");
  if (by_temp.size() < 2) {
    throw ValidationError("temperature profile needs >= 2 distinct temperatures");
  }
  for (const auto& [t, c] : by_temp) {
    prof.rates.push_back(
        {t, static_cast<double>(c.second) / static_cast<double>(c.first), c.first});
  }
  return prof;
}

}  // namespace ticlens
