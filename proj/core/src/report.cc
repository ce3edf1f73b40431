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

#include "ticlens/report.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ticlens/error.h"

#ifndef TICLENS_VERSION
#define TICLENS_VERSION "0.0.0"
#endif

namespace ticlens {

namespace {

using ojson = nlohmann::ordered_json;

// Round-trips through the 6-digit text so JSON numbers carry exactly the
// digits the other formats print.
double rounded(double v) {
  const std::string s = format_real(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

ojson cell_json(const ReportCell& c) {
  return std::visit(
      [](const auto& v) -> ojson {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return rounded(v);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          ojson a = ojson::array();
          for (double x : v) a.push_back(std::isfinite(x) ? ojson(rounded(x)) : ojson(nullptr));
          return a;
        } else {
          return v;
        }
      },
      c);
}

ReportCell json_cell(const ojson& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& x : j) {
      v.push_back(x.is_null() ? std::nan("") : x.get<double>());
    }
    return v;
  }
  throw ValidationError("report: unsupported JSON value " + j.dump());
}

std::string cell_text(const ReportCell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "NA";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_real(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          std::string out;
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out.push_back(';');
            out += format_real(v[i]);
          }
          return out;
        }
      },
      c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string md_field(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '|') {
      out += "\\|";
    } else if (ch == '\n' || ch == '\r') {
      out.push_back(' ');
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

ojson manifest_json(const RunManifest& m, bool with_timestamp) {
  ojson j;
  j["tool_version"] = m.tool_version;
  j["corpus_path"] = m.corpus_path;
  j["corpus_hash"] = m.corpus_hash;
  j["lexicon_hash"] = m.lexicon_hash;
  j["weights"] = m.weights;
  ojson flags = ojson::object();
  for (const auto& [k, v] : m.flags) flags[k] = v;
  j["flags"] = flags;
  if (with_timestamp) j["timestamp"] = m.timestamp;
  return j;
}

std::string render_json(const ReportTable& t, const RunManifest& m) {
  ojson j;
  j["kind"] = t.kind;
  j["manifest"] = manifest_json(m, false);
  j["columns"] = t.columns;
  ojson rows = ojson::array();
  for (const auto& r : t.rows) {
    ojson row = ojson::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = cell_json(r.at(c));
    rows.push_back(std::move(row));
  }
  j["empty"] = t.rows.empty();
  j["rows"] = std::move(rows);
  ojson summary = ojson::object();
  for (const auto& [k, v] : t.summary) summary[k] = cell_json(v);
  j["summary"] = std::move(summary);
  return j.dump(2) + "\n";
}

std::string render_csv(const ReportTable& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out.push_back(',');
    out += csv_field(t.columns[c]);
  }
  out.push_back('\n');
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (c) out.push_back(',');
      out += csv_field(cell_text(r.at(c)));
    }
    out.push_back('\n');
  }
  return out;
}

std::string render_md(const ReportTable& t, const RunManifest& m) {
  std::string out = "## " + t.kind + "\n\n";
  out += "|";
  for (const auto& c : t.columns) out += " " + md_field(c) + " |";
  out += "\n|";
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += "---|";
  out += "\n";
  for (const auto& r : t.rows) {
    out += "|";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      out += " " + md_field(cell_text(r.at(c))) + " |";
    }
    out += "\n";
  }
  if (t.rows.empty()) out += "\n_(no rows)_\n";
  if (!t.summary.empty()) {
    out += "\n";
    for (const auto& [k, v] : t.summary) out += "- " + k + ": " + md_field(cell_text(v)) + "\n";
  }
  out += "\n<sub>ticlens " + m.tool_version;
  if (!m.corpus_path.empty()) out += " | corpus " + md_field(m.corpus_path);
  if (!m.corpus_hash.empty()) out += " (" + m.corpus_hash + ")";
  if (!m.lexicon_hash.empty()) out += " | lexicon " + m.lexicon_hash;
  if (!m.weights.empty()) out += " | weights " + m.weights;
  for (const auto& [k, v] : m.flags) out += " | " + k + "=" + md_field(v);
  out += "</sub>\n";
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

ReportCell opt(const std::optional<double>& v) {
  if (!v) return std::monostate{};
  return *v;
}

ReportCell count(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

RunManifest make_manifest(std::vector<std::pair<std::string, std::string>> flags) {
  RunManifest m;
  m.tool_version = TICLENS_VERSION;
  m.flags = std::move(flags);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  m.timestamp = buf;
  return m;
}

std::string_view to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::kJson: return "json";
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kMd: return "md";
  }
  return "?";
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "md") return ReportFormat::kMd;
  return std::nullopt;
}

std::string_view file_extension(ReportFormat f) { return to_string(f); }

std::string format_real(double v) {
  if (!std::isfinite(v)) return "NA";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, r.ptr);
}

std::string render(const ReportTable& t, const RunManifest& m, ReportFormat f) {
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) {
      throw InvariantError("report row width " + std::to_string(r.size()) +
                           " != column count " + std::to_string(t.columns.size()));
    }
  }
  switch (f) {
    case ReportFormat::kJson: return render_json(t, m);
    case ReportFormat::kCsv: return render_csv(t);
    case ReportFormat::kMd: return render_md(t, m);
  }
  throw InvariantError("unknown report format");
}

void emit_report(const ReportTable& t, const RunManifest& m, ReportFormat f,
                 const std::filesystem::path& path) {
  const std::string body = render(t, m, f);
  write_file(path, body);
  write_file(path.string() + ".manifest.json", manifest_json(m, true).dump(2) + "\n");
}

std::pair<ReportTable, RunManifest> parse_report_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  try {
    ReportTable t;
    RunManifest m;
    t.kind = j.at("kind").get<std::string>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      std::vector<ReportCell> cells;
      for (const auto& c : t.columns) cells.push_back(json_cell(row.at(c)));
      t.rows.push_back(std::move(cells));
    }
    if (j.contains("summary")) {
      for (const auto& [k, v] : j["summary"].items()) t.summary.emplace_back(k, json_cell(v));
    }
    const auto& mj = j.at("manifest");
    m.tool_version = mj.value("tool_version", "");
    m.corpus_path = mj.value("corpus_path", "");
    m.corpus_hash = mj.value("corpus_hash", "");
    m.lexicon_hash = mj.value("lexicon_hash", "");
    m.weights = mj.value("weights", "");
    if (mj.contains("flags")) {
      for (const auto& [k, v] : mj["flags"].items()) m.flags.emplace_back(k, v.get<std::string>());
    }
    return {std::move(t), std::move(m)};
  } catch (const ojson::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
}

ReportTable to_report(const AnalysisTable& a) {
  ReportTable t;
  t.kind = "analysis";
  for (GroupField f : a.group_by) t.columns.emplace_back(to_string(f));
  for (const char* c : {"n_responses", "vti", "tic_rate", "mattr", "syc_score", "rep_rate",
                        "ttr", "hapax_ratio", "distinct1", "distinct2", "content_pct",
                        "filler_pct", "tic_pct", "low_confidence"}) {
    t.columns.emplace_back(c);
  }
  for (const auto& row : a.rows) {
    std::vector<ReportCell> r;
    for (const auto& p : row.key.parts) {
      if (p.field == GroupField::kTurn) {
        r.emplace_back(static_cast<std::int64_t>(p.number));
      } else if (p.numeric) {
        r.emplace_back(p.number);
      } else {
        r.emplace_back(p.text);
      }
    }
    const auto& m = row.metrics;
    r.emplace_back(count(m.n_responses));
    for (double v : {row.vti, m.tic_rate, m.mattr, m.syc_score, m.rep_rate, m.ttr,
                     m.hapax_ratio, m.distinct1, m.distinct2, m.composition.content_pct,
                     m.composition.filler_pct, m.composition.tic_pct}) {
      r.emplace_back(v);
    }
    r.emplace_back(row.low_confidence);
    t.rows.push_back(std::move(r));
  }
  t.summary.emplace_back("dropped_records", count(a.dropped_records));
  t.summary.emplace_back("weights", a.provenance.weights.to_string());
  return t;
}

ReportTable to_report(const TurnProfile& p) {
  ReportTable t;
  t.kind = "turns";
  t.columns = {"turn", "tic_rate", "n_responses"};
  for (const auto& tr : p.per_turn) {
    t.rows.push_back({static_cast<std::int64_t>(tr.turn), tr.tic_rate, count(tr.n)});
  }
  t.summary.emplace_back("model", p.model ? ReportCell(*p.model) : ReportCell());
  t.summary.emplace_back("slope", p.slope);
  t.summary.emplace_back("pct_increase", opt(p.pct_increase));
  t.summary.emplace_back("mean_model_pct_increase", opt(p.mean_model_pct));
  for (const auto& [model, pct] : p.per_model_pct) {
    t.summary.emplace_back("pct_increase." + model, opt(pct));
  }
  return t;
}

ReportTable to_report(const CalibrationResult& c) {
  ReportTable t;
  t.kind = "calibration";
  t.columns = {"alpha", "beta", "gamma", "delta", "rho", "candidates"};
  t.rows.push_back({c.weights.alpha, c.weights.beta, c.weights.gamma, c.weights.delta, c.rho,
                    count(c.candidates)});
  return t;
}

ReportTable to_report(const CrossLingualReport& x) {
  ReportTable t;
  t.kind = "cross_lingual";
  t.columns = {"model", "syc_en", "syc_zh", "delta_pct", "tic_rate_en", "tic_rate_zh"};
  for (const auto& r : x.rows) {
    t.rows.push_back({r.model, r.syc_en, r.syc_zh, opt(r.delta_pct), r.tic_rate_en,
                      r.tic_rate_zh});
  }
  t.summary.emplace_back("mean_delta_pct", opt(x.mean_delta_pct));
  std::string excluded;
  for (const auto& m : x.excluded_models) {
    if (!excluded.empty()) excluded.push_back(',');
    excluded += m;
  }
  t.summary.emplace_back("excluded_models", excluded);
  return t;
}

ReportTable to_report(const TemperatureProfile& p) {
  ReportTable t;
  t.kind = "temperature";
  t.columns = {"temperature", "tic_rate", "n_responses"};
  for (const auto& r : p.rates) t.rows.push_back({r.temperature, r.tic_rate, count(r.n)});
  t.summary.emplace_back("dropped_records", count(p.dropped_records));
  return t;
}

ReportTable to_report(const std::vector<OverrepEntry>& entries) {
  ReportTable t;
  t.kind = "ngram";
  t.columns = {"ngram", "n", "model_count", "model_rate", "ref_rate", "ratio", "weight"};
  for (const auto& e : entries) {
    std::string g;
    for (const auto& w : e.ngram) {
      if (!g.empty()) g.push_back(' ');
      g += w;
    }
    t.rows.push_back({g, static_cast<std::int64_t>(e.n), count(e.model_count), e.model_rate,
                      e.ref_rate, e.ratio, e.weight});
  }
  return t;
}

ReportTable to_report(const std::vector<TicCluster>& clusters) {
  ReportTable t;
  t.kind = "clusters";
  t.columns = {"cluster_id", "phrase", "founder", "assignment_cosine", "vector"};
  for (const auto& c : clusters) {
    for (std::size_t i = 0; i < c.member_phrases.size(); ++i) {
      t.rows.push_back({static_cast<std::int64_t>(c.id), c.member_phrases[i], i == 0,
                        c.assignment_cosines[i], c.member_vectors[i].values()});
    }
  }
  t.summary.emplace_back("n_clusters", static_cast<std::int64_t>(clusters.size()));
  return t;
}

ReportTable scan_report(const Corpus& corpus, const std::vector<ResponseScan>& scans) {
  if (scans.size() != corpus.size()) throw InvariantError("scan_report: scan count mismatch");
  ReportTable t;
  t.kind = "scan";
  t.columns = {"response_id", "model", "language", "start", "end",
               "category", "phrase", "surface", "position_rule", "cluster_id"};
  std::uint64_t with_tic = 0, matches = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& rec = corpus[i];
    if (!scans[i].matches.empty()) ++with_tic;
    for (const auto& m : scans[i].matches) {
      ++matches;
      t.rows.push_back({rec.id, rec.model, std::string(to_string(rec.language)),
                        static_cast<std::int64_t>(m.start), static_cast<std::int64_t>(m.end),
                        std::string(to_string(m.resolved_category)), m.entry->phrase,
                        rec.text.substr(m.start, m.end - m.start),
                        std::string(to_string(m.entry->position_rule)),
                        m.cluster_id ? ReportCell(static_cast<std::int64_t>(*m.cluster_id))
                                     : ReportCell()});
    }
  }
  t.summary.emplace_back("n_responses", count(corpus.size()));
  t.summary.emplace_back("responses_with_tic", count(with_tic));
  t.summary.emplace_back("n_matches", count(matches));
  return t;
}

}  // namespace ticlens
