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

#include "ticlens/corpus.h"

#include <fstream>
#include <sstream>
#include <tuple>
#include <set>

#include "json.hpp"
#include "ticlens/error.h"
#include "ticlens/text.h"

namespace ticlens {

using nlohmann::json;

Corpus::Corpus(std::vector<ResponseRecord> records, std::string source_path)
    : records_(std::move(records)), source_path_(std::move(source_path)) {
  by_id_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!by_id_.emplace(records_[i].id, i).second) {
      throw ValidationError("duplicate response id \"" + records_[i].id +
                            "\" in " + source_path_);
    }
  }
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

namespace {

const std::set<std::string, std::less<>> kRecordFields = {
    "id", "model", "language", "task", "prompt_type", "turn", "temperature",
    "text"};

// Returns an error message, or empty on success.
std::string record_from_json(const json& j, ResponseRecord* r) {
  if (!j.is_object()) return "line is not a JSON object";
  auto str_field = [&](const char* name, std::string* out) -> std::string {
    auto it = j.find(name);
    if (it == j.end()) return std::string("missing field \"") + name + "\"";
    if (!it->is_string()) return std::string("field \"") + name + "\" must be a string";
    *out = it->get<std::string>();
    return {};
  };
  std::string err;
  if (!(err = str_field("id", &r->id)).empty()) return err;
  if (r->id.empty()) return "field \"id\" is empty";
  if (!(err = str_field("model", &r->model)).empty()) return err;
  std::string lang;
  if (!(err = str_field("language", &lang)).empty()) return err;
  auto parsed = parse_language(lang);
  if (!parsed) return "unsupported language \"" + lang + "\"";
  r->language = *parsed;
  if (!(err = str_field("task", &r->task)).empty()) return err;
  if (!(err = str_field("text", &r->text)).empty()) return err;
  if (!text::is_valid_utf8(r->text)) return "field \"text\" is not valid UTF-8";
  if (text::trim(r->text).empty()) return "field \"text\" is empty";

  if (auto it = j.find("turn"); it == j.end() || it->is_null()) {
    r->turn = 1;
  } else if (it->is_number_integer()) {
    const auto t = it->get<long long>();
    if (t < 1) return "field \"turn\" must be >= 1";
    r->turn = static_cast<int>(t);
  } else {
    return "field \"turn\" must be an integer";
  }

  if (auto it = j.find("prompt_type"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) return "field \"prompt_type\" must be a string";
    r->prompt_type = it->get<std::string>();
  }
  if (auto it = j.find("temperature"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) return "field \"temperature\" must be a number";
    const double t = it->get<double>();
    if (!(t >= 0.0 && t <= 2.0)) return "field \"temperature\" outside [0, 2]";
    r->temperature = t;
  }

  json extra = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kRecordFields.contains(it.key())) extra[it.key()] = it.value();
  }
  if (!extra.empty()) r->extra = extra.dump();
  return {};
}

}  // namespace

CorpusLoad parse_corpus(std::istream& in, std::string source) {
  std::vector<ResponseRecord> records;
  std::vector<RejectedLine> rejects;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      rejects.push_back({lineno, "malformed JSON"});
      continue;
    }
    ResponseRecord r;
    std::string err = record_from_json(j, &r);
    if (!err.empty()) {
      rejects.push_back({lineno, std::move(err)});
      continue;
    }
    records.push_back(std::move(r));
  }
  return {Corpus(std::move(records), std::move(source)), std::move(rejects)};
}

CorpusLoad load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

std::string format_rejects(const std::vector<RejectedLine>& rejects) {
  std::string out;
  for (const auto& r : rejects) {
    out += "line " + std::to_string(r.line) + ": " + r.reason + "\n";
  }
  return out;
}

std::string to_json_line(const ResponseRecord& r) {
  json j = r.extra.empty() ? json::object() : json::parse(r.extra);
  j["id"] = r.id;
  j["model"] = r.model;
  j["language"] = std::string(to_string(r.language));
  j["task"] = r.task;
  if (r.prompt_type) j["prompt_type"] = *r.prompt_type;
  j["turn"] = r.turn;
  if (r.temperature) j["temperature"] = *r.temperature;
  j["text"] = r.text;
  return j.dump();
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus.records()) out << to_json_line(r) << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  write_corpus(corpus, out);
  if (!out) throw IoError("write failed for " + path.string());
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::kNaturalness: return "naturalness";
    case Dimension::kHelpfulness: return "helpfulness";
    case Dimension::kSycophancyPerception: return "sycophancy_perception";
    case Dimension::kTrust: return "trust";
    case Dimension::kAnnoyance: return "annoyance";
    case Dimension::kRepetitiveness: return "repetitiveness";
  }
  return "unknown";
}

std::optional<Dimension> parse_dimension(std::string_view s) {
  for (auto d : {Dimension::kNaturalness, Dimension::kHelpfulness,
                 Dimension::kSycophancyPerception, Dimension::kTrust,
                 Dimension::kAnnoyance, Dimension::kRepetitiveness}) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

std::vector<AnnotationRecord> parse_annotations(std::istream& in,
                                                const std::string& source) {
  std::vector<AnnotationRecord> out;
  std::set<std::tuple<std::string, std::string, Dimension>> seen;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ValidationError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("malformed JSON");
    AnnotationRecord a;
    for (const char* key : {"response_id", "rater_id", "dimension"}) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) {
        fail(std::string("field \"") + key + "\" missing or not a string");
      }
    }
    a.response_id = j["response_id"].get<std::string>();
    a.rater_id = j["rater_id"].get<std::string>();
    const auto dim_name = j["dimension"].get<std::string>();
    auto dim = parse_dimension(dim_name);
    if (!dim) fail("unknown dimension \"" + dim_name + "\"");
    a.dimension = *dim;
    auto sc = j.find("score");
    if (sc == j.end() || !sc->is_number_integer()) {
      fail("field \"score\" missing or not an integer");
    }
    const auto score = sc->get<long long>();
    if (score < 1 || score > 5) {
      fail("score " + std::to_string(score) + " outside 1..5");
    }
    a.score = static_cast<int>(score);
    if (!seen.emplace(a.response_id, a.rater_id, a.dimension).second) {
      fail("duplicate annotation (" + a.response_id + ", " + a.rater_id +
           ", " + std::string(to_string(a.dimension)) + ")");
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AnnotationRecord> load_annotations(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open annotation file " + path.string());
  return parse_annotations(in, path.string());
}

std::string file_content_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = text::fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return text::hex64(h);
}

}  // namespace ticlens
