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

#include <gtest/gtest.h>

#include <clocale>
#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>

#include "json.hpp"
#include "test_util.h"
#include "ticlens/error.h"

namespace ticlens {
namespace {

using testing::Gen;
using testing::TempDir;

RunManifest fixed_manifest() {
  RunManifest m;
  m.tool_version = "0.0.0-test";
  m.corpus_path = "corpus.jsonl";
  m.corpus_hash = "00ff";
  m.lexicon_hash = "abcd";
  m.weights = "0.3,0.2,0.3,0.2";
  m.flags = {{"group_by", "model"}};
  m.timestamp = "2026-01-01T00:00:00Z";
  return m;
}

ReportTable two_rows() {
  ReportTable t;
  t.kind = "demo";
  t.columns = {"model", "n", "vti", "flag", "vec"};
  t.rows = {{std::string("a"), std::int64_t{3}, 0.123456789, true, std::vector<double>{0.5, 1.25}},
            {std::string("b,c"), std::int64_t{-1}, std::nan(""), false, std::vector<double>{}}};
  t.summary = {{"mean", 0.25}, {"undefined", std::monostate{}}};
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(FormatReal, SixSignificantDigits) {
  EXPECT_EQ(format_real(0.123456789), "0.123457");
  EXPECT_EQ(format_real(100.0), "100");
  EXPECT_EQ(format_real(-0.5), "-0.5");
  EXPECT_EQ(format_real(1234567.0), "1.23457e+06");
  EXPECT_EQ(format_real(std::nan("")), "NA");
  EXPECT_EQ(format_real(INFINITY), "NA");
}

TEST(FormatReal, IgnoresGlobalLocale) {
  struct Comma : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
  };
  const auto saved = std::locale::global(std::locale(std::locale::classic(), new Comma));
  const char* c_locale = std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  const std::string s = format_real(0.5);
  const std::string body = render(two_rows(), fixed_manifest(), ReportFormat::kCsv);
  std::locale::global(saved);
  std::setlocale(LC_NUMERIC, "C");
  (void)c_locale;
  EXPECT_EQ(s, "0.5");
  EXPECT_NE(body.find("0.123457"), std::string::npos);
}

TEST(Render, JsonShape) {
  const auto body = render(two_rows(), fixed_manifest(), ReportFormat::kJson);
  const auto j = nlohmann::json::parse(body);
  EXPECT_EQ(j["kind"], "demo");
  EXPECT_EQ(j["empty"], false);
  EXPECT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["vti"].get<double>(), 0.123457);
  EXPECT_TRUE(j["rows"][1]["vti"].is_null());
  EXPECT_EQ(j["manifest"]["lexicon_hash"], "abcd");
  EXPECT_FALSE(j["manifest"].contains("timestamp"));
  EXPECT_TRUE(j["summary"]["undefined"].is_null());
}

TEST(Render, CsvQuotingAndNa) {
  const auto body = render(two_rows(), fixed_manifest(), ReportFormat::kCsv);
  EXPECT_EQ(body,
            "model,n,vti,flag,vec\n"
            "a,3,0.123457,true,0.5;1.25\n"
            "\"b,c\",-1,NA,false,\n");
}

TEST(Render, MarkdownPipeTable) {
  const auto body = render(two_rows(), fixed_manifest(), ReportFormat::kMd);
  EXPECT_NE(body.find("| model | n | vti | flag | vec |\n|---|---|---|---|---|\n"), std::string::npos);
  EXPECT_NE(body.find("| a | 3 | 0.123457 | true | 0.5;1.25 |"), std::string::npos);
  EXPECT_NE(body.find("- mean: 0.25"), std::string::npos);
  EXPECT_NE(body.find("lexicon abcd"), std::string::npos);
  EXPECT_EQ(body.find("2026-01-01"), std::string::npos);
}

TEST(Render, EmptyTable) {
  ReportTable t;
  t.kind = "empty";
  t.columns = {"x", "y"};
  EXPECT_EQ(render(t, fixed_manifest(), ReportFormat::kCsv), "x,y\n");
  const auto j = nlohmann::json::parse(render(t, fixed_manifest(), ReportFormat::kJson));
  EXPECT_EQ(j["empty"], true);
  EXPECT_TRUE(j["rows"].empty());
}

TEST(EmitReport, ByteIdenticalAndSidecar) {
  TempDir dir;
  auto m = fixed_manifest();
  for (auto f : {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kMd}) {
    const auto p1 = dir.path() / ("a." + std::string(file_extension(f)));
    const auto p2 = dir.path() / ("b." + std::string(file_extension(f)));
    emit_report(two_rows(), m, f, p1);
    m.timestamp = "2030-12-31T23:59:59Z";
    emit_report(two_rows(), m, f, p2);
    EXPECT_EQ(slurp(p1), slurp(p2));
    const auto side = nlohmann::json::parse(slurp(p2.string() + ".manifest.json"));
    EXPECT_EQ(side["timestamp"], "2030-12-31T23:59:59Z");
  }
}

TEST(EmitReport, UnwritablePathIsIoError) {
  EXPECT_THROW(emit_report(two_rows(), fixed_manifest(), ReportFormat::kJson,
                           "/nonexistent/dir/report.json"),
               IoError);
}

TEST(ParseReportJson, RoundTrip) {
  const auto body = render(two_rows(), fixed_manifest(), ReportFormat::kJson);
  const auto [t, m] = parse_report_json(body);
  EXPECT_EQ(render(t, m, ReportFormat::kJson), body);
  EXPECT_EQ(render(t, m, ReportFormat::kCsv), render(two_rows(), fixed_manifest(), ReportFormat::kCsv));
  EXPECT_THROW(parse_report_json("[1]"), ValidationError);
}

// Minimal RFC 4180 reader used as the cross-format oracle.
std::vector<std::vector<std::string>> read_csv(const std::string& s) {
  std::vector<std::vector<std::string>> rows(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (quoted) {
      if (ch == '"' && i + 1 < s.size() && s[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      rows.back().push_back(field);
      field.clear();
    } else if (ch == '\n') {
      rows.back().push_back(field);
      field.clear();
      rows.emplace_back();
    } else {
      field.push_back(ch);
    }
  }
  rows.pop_back();
  return rows;
}

bool same_value(const nlohmann::json& j, const std::string& text) {
  if (j.is_null()) return text == "NA";
  if (j.is_boolean()) return text == (j.get<bool>() ? "true" : "false");
  if (j.is_string()) return text == j.get<std::string>();
  if (j.is_number_integer()) return text == std::to_string(j.get<std::int64_t>());
  if (j.is_number()) return std::strtod(text.c_str(), nullptr) == j.get<double>();
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ';');) parts.push_back(p);
  if (parts.size() != j.size()) return false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!same_value(j[i], parts[i])) return false;
  }
  return true;
}

TEST(ReportProperty, JsonAndCsvCarryIdenticalValues) {
  Gen g(71);
  const std::vector<std::string> words = {"a", "b,c", "say \"hi\"", "line\nbreak", "模型", ""};
  for (int round = 0; round < 2000; ++round) {
    ReportTable t;
    t.kind = "fuzz";
    const std::size_t ncol = 1 + g.below(6);
    for (std::size_t c = 0; c < ncol; ++c) t.columns.push_back("c" + std::to_string(c));
    for (std::size_t r = 0, n = g.below(6); r < n; ++r) {
      std::vector<ReportCell> row;
      for (std::size_t c = 0; c < ncol; ++c) {
        switch (g.below(6)) {
          case 0: row.emplace_back(std::monostate{}); break;
          case 1: row.emplace_back(static_cast<std::int64_t>(g.below(100000)) - 500); break;
          case 2: row.emplace_back(std::ldexp(g.unit() - 0.5, static_cast<int>(g.below(60)) - 30)); break;
          case 3: row.emplace_back(g.pick(words)); break;
          case 4: row.emplace_back(g.coin()); break;
          default: row.emplace_back(std::vector<double>{g.unit(), -g.unit() * 1e5}); break;
        }
      }
      t.rows.push_back(std::move(row));
    }
    const auto j = nlohmann::json::parse(render(t, fixed_manifest(), ReportFormat::kJson));
    const auto csv = read_csv(render(t, fixed_manifest(), ReportFormat::kCsv));
    ASSERT_EQ(csv.size(), t.rows.size() + 1);
    ASSERT_EQ(csv[0], t.columns);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      ASSERT_EQ(csv[r + 1].size(), ncol);
      for (std::size_t c = 0; c < ncol; ++c) {
        ASSERT_TRUE(same_value(j["rows"][r][t.columns[c]], csv[r + 1][c]))
            << j["rows"][r][t.columns[c]].dump() << " vs " << csv[r + 1][c];
      }
    }
  }
}

TEST(ToReport, AnalysisTableColumns) {
  AnalysisTable a;
  a.group_by = {GroupField::kModel};
  AnalysisRow row;
  row.key.parts = {*key_part(testing::record("x", "x", Language::kEn, "gpt"), GroupField::kModel)};
  row.metrics.n_responses = 4;
  row.vti = std::nan("");
  row.low_confidence = true;
  a.rows = {row};
  const auto t = to_report(a);
  EXPECT_EQ(t.kind, "analysis");
  EXPECT_EQ(t.columns.front(), "model");
  EXPECT_EQ(t.columns.back(), "low_confidence");
  EXPECT_EQ(std::get<std::string>(t.rows[0][0]), "gpt");
  const auto csv = render(t, fixed_manifest(), ReportFormat::kCsv);
  EXPECT_NE(csv.find("gpt,4,NA"), std::string::npos) << csv;
}

TEST(ToReport, TurnProfileReportsBothIncreases) {
  TurnProfile p;
  p.per_turn = {{1, 0.2, 10}, {2, 0.42, 10}};
  p.slope = 0.22;
  p.pct_increase = 110.0;
  p.mean_model_pct = 108.0;
  const auto t = to_report(p);
  bool pooled = false, mean = false;
  for (const auto& [k, v] : t.summary) {
    pooled = pooled || (k == "pct_increase" && std::get<double>(v) == 110.0);
    mean = mean || (k == "mean_model_pct_increase" && std::get<double>(v) == 108.0);
  }
  EXPECT_TRUE(pooled);
  EXPECT_TRUE(mean);
  EXPECT_EQ(t.rows.size(), 2u);
}

}  // namespace
}  // namespace ticlens
