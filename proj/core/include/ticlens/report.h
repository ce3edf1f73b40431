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

#ifndef TICLENS_REPORT_H_
#define TICLENS_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ticlens/analysis.h"
#include "ticlens/corpus.h"
#include "ticlens/lexicon.h"
#include "ticlens/ngram.h"
#include "ticlens/semcluster.h"
#include "ticlens/vti.h"

namespace ticlens {

// monostate renders as null (JSON) / NA (CSV, Markdown). Non-finite doubles
// render the same way.
using ReportCell = std::variant<std::monostate, std::int64_t, double, std::string,
                                bool, std::vector<double>>;

struct ReportTable {
  std::string kind;  // "analysis", "turns", "calibration", ...
  std::vector<std::string> columns;
  std::vector<std::vector<ReportCell>> rows;
  // Scalars reported next to the table, in insertion order.
  std::vector<std::pair<std::string, ReportCell>> summary;
};

struct RunManifest {
  std::string tool_version;
  std::string corpus_path;
  std::string corpus_hash;
  std::string lexicon_hash;
  std::string weights;
  std::vector<std::pair<std::string, std::string>> flags;
  // Written only to the sidecar file, never into a report body.
  std::string timestamp;
};

RunManifest make_manifest(std::vector<std::pair<std::string, std::string>> flags = {});

enum class ReportFormat { kJson, kCsv, kMd };
std::string_view to_string(ReportFormat f);
std::optional<ReportFormat> parse_report_format(std::string_view s);
std::string_view file_extension(ReportFormat f);

// Six significant digits, '.' decimal separator regardless of locale.
// "NA" for non-finite values.
std::string format_real(double v);

// Deterministic report body. JSON and Markdown embed the manifest (without
// timestamp); CSV holds only the header and rows.
std::string render(const ReportTable& table, const RunManifest& manifest,
                   ReportFormat format);

// Writes the body to `path` and the full manifest (with timestamp) to
// `<path>.manifest.json`. Throws IoError when either cannot be written.
void emit_report(const ReportTable& table, const RunManifest& manifest,
                 ReportFormat format, const std::filesystem::path& path);

// Inverse of the JSON rendering, for re-rendering a saved report.
std::pair<ReportTable, RunManifest> parse_report_json(std::string_view json_text);

ReportTable to_report(const AnalysisTable& table);
ReportTable to_report(const TurnProfile& profile);
ReportTable to_report(const CalibrationResult& result);
ReportTable to_report(const CrossLingualReport& report);
ReportTable to_report(const TemperatureProfile& profile);
ReportTable to_report(const std::vector<OverrepEntry>& entries);
// One row per member with its vector, ready for external projection.
ReportTable to_report(const std::vector<TicCluster>& clusters);
// One row per match, in record order.
ReportTable scan_report(const Corpus& corpus, const std::vector<ResponseScan>& scans);

}  // namespace ticlens

#endif  // TICLENS_REPORT_H_
