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

#include "ticlens/lexicon.h"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "parallel.h"
#include "ticlens/error.h"
#include "ticlens/text.h"

namespace ticlens {

using nlohmann::json;

std::string_view to_string(TicCategory c) {
  switch (c) {
    case TicCategory::kSycophanticOpener: return "sycophantic_opener";
    case TicCategory::kHedging: return "hedging";
    case TicCategory::kFillerTransition: return "filler_transition";
    case TicCategory::kEmphaticAffirmation: return "emphatic_affirmation";
    case TicCategory::kPseudoEmpathy: return "pseudo_empathy";
    case TicCategory::kOverusedVocabulary: return "overused_vocabulary";
    case TicCategory::kFalseModesty: return "false_modesty";
    case TicCategory::kExcessiveEmphasis: return "excessive_emphasis";
    case TicCategory::kFormulaicTransition: return "formulaic_transition";
  }
  return "unknown";
}

std::optional<TicCategory> parse_category(std::string_view s) {
  for (auto c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

int category_precedence(TicCategory c) {
  switch (c) {
    case TicCategory::kSycophanticOpener: return 0;
    case TicCategory::kPseudoEmpathy: return 1;
    case TicCategory::kFalseModesty: return 2;
    case TicCategory::kExcessiveEmphasis: return 3;
    case TicCategory::kHedging: return 4;
    case TicCategory::kEmphaticAffirmation: return 5;
    case TicCategory::kFillerTransition: return 6;
    case TicCategory::kFormulaicTransition: return 7;
    case TicCategory::kOverusedVocabulary: return 8;
  }
  return 9;
}

std::string_view to_string(PositionRule r) {
  switch (r) {
    case PositionRule::kAnywhere: return "anywhere";
    case PositionRule::kResponseInitial: return "response_initial";
    case PositionRule::kSentenceInitial: return "sentence_initial";
  }
  return "unknown";
}

std::optional<PositionRule> parse_position_rule(std::string_view s) {
  for (auto r : {PositionRule::kAnywhere, PositionRule::kResponseInitial,
                 PositionRule::kSentenceInitial}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// TicLexicon

void TicLexicon::add(TicEntry entry) {
  if (!text::is_valid_utf8(entry.phrase)) {
    throw ValidationError("lexicon phrase is not valid UTF-8");
  }
  entry.phrase = std::string(text::trim(entry.phrase));
  if (entry.phrase.empty()) throw ValidationError("lexicon phrase is empty");
  const std::string folded = text::fold(entry.phrase);
  for (const auto& e : entries_) {
    if (e.language == entry.language && e.category == entry.category &&
        text::fold(e.phrase) == folded) {
      throw ValidationError("duplicate lexicon entry (\"" + entry.phrase +
                            "\", " + std::string(to_string(entry.language)) +
                            ", " + std::string(to_string(entry.category)) + ")");
    }
  }
  entries_.push_back(std::move(entry));
}

namespace {

// Line number of each top-level array element, found by a string-aware scan
// of the raw text. Used only for error messages.
std::vector<std::size_t> element_lines(std::string_view s) {
  std::vector<std::size_t> lines;
  std::size_t line = 1;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  bool expect_element = false;
  for (char c : s) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    if (depth == 1 && expect_element && c != ']') {
      lines.push_back(line);
      expect_element = false;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
      if (depth == 1 && c == '[') expect_element = true;
    } else if (c == ']' || c == '}') {
      --depth;
    } else if (c == ',' && depth == 1) {
      expect_element = true;
    }
  }
  return lines;
}

}  // namespace

TicLexicon TicLexicon::parse(std::string_view json_text,
                             const std::string& source) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) {
    throw ValidationError(source + ": lexicon is not valid JSON");
  }
  if (!doc.is_array()) {
    throw ValidationError(source + ": lexicon must be a JSON array");
  }
  const auto lines = element_lines(json_text);
  TicLexicon lex;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& j = doc[i];
    const std::string where =
        source + ":" + (i < lines.size() ? std::to_string(lines[i]) : "?") +
        " (entry " + std::to_string(i + 1) + ")";
    auto fail = [&](const std::string& msg) {
      throw ValidationError(where + ": " + msg);
    };
    if (!j.is_object()) fail("entry is not an object");
    auto get_string = [&](const char* key) -> std::string {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) {
        fail(std::string("field \"") + key + "\" missing or not a string");
      }
      return it->get<std::string>();
    };
    TicEntry e;
    e.phrase = get_string("phrase");
    const std::string lang = get_string("language");
    auto l = parse_language(lang);
    if (!l) fail("unknown language \"" + lang + "\"");
    e.language = *l;
    const std::string cat = get_string("category");
    auto c = parse_category(cat);
    if (!c) fail("unknown category \"" + cat + "\"");
    e.category = *c;
    if (auto it = j.find("position_rule"); it != j.end()) {
      if (!it->is_string()) fail("field \"position_rule\" must be a string");
      auto r = parse_position_rule(it->get<std::string>());
      if (!r) fail("unknown position_rule \"" + it->get<std::string>() + "\"");
      e.position_rule = *r;
    }
    if (auto it = j.find("is_vocabulary_word"); it != j.end()) {
      if (!it->is_boolean()) fail("field \"is_vocabulary_word\" must be a boolean");
      e.is_vocabulary_word = it->get<bool>();
    }
    try {
      lex.add(std::move(e));
    } catch (const ValidationError& err) {
      fail(err.what());
    }
  }
  return lex;
}

TicLexicon TicLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::size_t TicLexicon::count(Language lang) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [&](const TicEntry& e) { return e.language == lang; }));
}

std::map<std::pair<Language, TicCategory>, std::size_t> TicLexicon::counts()
    const {
  std::map<std::pair<Language, TicCategory>, std::size_t> out;
  for (const auto& e : entries_) ++out[{e.language, e.category}];
  return out;
}

std::string TicLexicon::to_json() const {
  json arr = json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["phrase"] = e.phrase;
    j["language"] = std::string(to_string(e.language));
    j["category"] = std::string(to_string(e.category));
    j["position_rule"] = std::string(to_string(e.position_rule));
    j["is_vocabulary_word"] = e.is_vocabulary_word;
    arr.push_back(json::parse(j.dump()));
  }
  return arr.dump(2);
}

std::string TicLexicon::content_hash() const {
  return text::hex64(text::fnv1a64(to_json()));
}

// ---------------------------------------------------------------------------
// TicMatcher

struct TicMatcher::Impl {
  Language language = Language::kEn;
  std::vector<TicEntry> entries;
  std::vector<std::string> patterns;
  std::vector<std::vector<std::uint32_t>> pattern_entries;
  // Whether the pattern starts / ends with a word character, in which case
  // the neighbouring text character must not be one.
  std::vector<bool> left_boundary;
  std::vector<bool> right_boundary;
  // Dense DFA: delta[state * 256 + byte].
  std::vector<std::int32_t> delta;
  std::vector<std::vector<std::uint32_t>> outputs;
};

TicMatcher TicMatcher::compile(const TicLexicon& lexicon, Language language) {
  auto impl = std::make_shared<Impl>();
  impl->language = language;
  for (const auto& e : lexicon.entries()) {
    if (e.language == language) impl->entries.push_back(e);
  }
  if (impl->entries.empty()) {
    throw ValidationError("lexicon has no entries for language \"" +
                          std::string(to_string(language)) + "\"");
  }

  std::map<std::string, std::uint32_t> pattern_ids;
  for (std::uint32_t i = 0; i < impl->entries.size(); ++i) {
    const std::string folded = text::fold(impl->entries[i].phrase);
    auto [it, inserted] = pattern_ids.emplace(
        folded, static_cast<std::uint32_t>(impl->patterns.size()));
    if (inserted) {
      impl->patterns.push_back(folded);
      impl->pattern_entries.emplace_back();
      std::size_t len = 0;
      impl->left_boundary.push_back(
          text::is_word_char(text::decode_utf8(folded, 0, &len)));
      const std::size_t last = text::previous_cp_start(folded, folded.size());
      impl->right_boundary.push_back(
          text::is_word_char(text::decode_utf8(folded, last, &len)));
    }
    impl->pattern_entries[it->second].push_back(i);
  }

  // Trie.
  std::vector<std::array<std::int32_t, 256>> trie(1);
  trie[0].fill(-1);
  std::vector<std::vector<std::uint32_t>> out(1);
  for (std::uint32_t p = 0; p < impl->patterns.size(); ++p) {
    std::int32_t s = 0;
    for (unsigned char c : impl->patterns[p]) {
      if (trie[s][c] < 0) {
        trie[s][c] = static_cast<std::int32_t>(trie.size());
        trie.emplace_back();
        trie.back().fill(-1);
        out.emplace_back();
      }
      s = trie[s][c];
    }
    out[s].push_back(p);
  }

  // Failure links, breadth first, folded into a complete DFA.
  const std::size_t n = trie.size();
  std::vector<std::int32_t> fail(n, 0);
  impl->delta.assign(n * 256, 0);
  std::deque<std::int32_t> queue;
  for (int c = 0; c < 256; ++c) {
    const std::int32_t t = trie[0][c];
    if (t >= 0) {
      impl->delta[c] = t;
      fail[t] = 0;
      queue.push_back(t);
    } else {
      impl->delta[c] = 0;
    }
  }
  while (!queue.empty()) {
    const std::int32_t s = queue.front();
    queue.pop_front();
    const auto& suffix_out = out[fail[s]];
    out[s].insert(out[s].end(), suffix_out.begin(), suffix_out.end());
    for (int c = 0; c < 256; ++c) {
      const std::int32_t t = trie[s][c];
      if (t >= 0) {
        fail[t] = impl->delta[static_cast<std::size_t>(fail[s]) * 256 + c];
        impl->delta[static_cast<std::size_t>(s) * 256 + c] = t;
        queue.push_back(t);
      } else {
        impl->delta[static_cast<std::size_t>(s) * 256 + c] =
            impl->delta[static_cast<std::size_t>(fail[s]) * 256 + c];
      }
    }
  }
  impl->outputs = std::move(out);

  TicMatcher m;
  m.impl_ = std::move(impl);
  return m;
}

Language TicMatcher::language() const { return impl_->language; }
const std::vector<TicEntry>& TicMatcher::entries() const {
  return impl_->entries;
}
std::size_t TicMatcher::pattern_count() const { return impl_->patterns.size(); }
const std::string& TicMatcher::pattern(std::uint32_t id) const {
  return impl_->patterns[id];
}
const std::vector<std::uint32_t>& TicMatcher::pattern_entries(
    std::uint32_t id) const {
  return impl_->pattern_entries[id];
}

void TicMatcher::find_all(std::string_view folded,
                          std::vector<RawHit>* out) const {
  const auto& delta = impl_->delta;
  std::int32_t s = 0;
  for (std::size_t i = 0; i < folded.size(); ++i) {
    s = delta[static_cast<std::size_t>(s) * 256 +
              static_cast<unsigned char>(folded[i])];
    const auto& hits = impl_->outputs[static_cast<std::size_t>(s)];
    for (std::uint32_t p : hits) {
      const auto len = static_cast<std::uint32_t>(impl_->patterns[p].size());
      const auto end = static_cast<std::uint32_t>(i + 1);
      const std::uint32_t begin = end - len;
      std::size_t cp_len = 0;
      if (impl_->left_boundary[p] && begin > 0 &&
          text::is_word_char(text::decode_utf8(
              folded, text::previous_cp_start(folded, begin), &cp_len))) {
        continue;
      }
      if (impl_->right_boundary[p] && end < folded.size() &&
          text::is_word_char(text::decode_utf8(folded, end, &cp_len))) {
        continue;
      }
      out->push_back({begin, end, p});
    }
  }
}

// ---------------------------------------------------------------------------
// scan_response

namespace {

struct Candidate {
  std::uint32_t start;
  std::uint32_t end;
  std::uint32_t entry;
};

}  // namespace

std::vector<TicMatch> scan_response(const TicMatcher& matcher,
                                    const ResponseRecord& record,
                                    const std::vector<Token>& tokens,
                                    const std::vector<SentenceSpan>& sentences) {
  std::vector<TicMatch> result;
  if (record.text.empty()) return result;
  const auto folded = text::fold_with_map(record.text);
  std::vector<TicMatcher::RawHit> hits;
  matcher.find_all(folded.text, &hits);
  if (hits.empty()) return result;

  const auto& entries = matcher.entries();
  auto token_at = [&](std::uint32_t start) -> const Token* {
    auto it = std::lower_bound(
        tokens.begin(), tokens.end(), start,
        [](const Token& t, std::uint32_t s) { return t.start < s; });
    return (it != tokens.end() && it->start == start) ? &*it : nullptr;
  };

  std::vector<Candidate> cands;
  for (const auto& hit : hits) {
    const std::uint32_t start = folded.origin[hit.begin];
    const std::uint32_t end = folded.origin[hit.end];
    for (std::uint32_t ei : matcher.pattern_entries(hit.pattern)) {
      if (entries[ei].is_vocabulary_word) {
        const Token* tok = token_at(start);
        if (tok == nullptr || tok->end != end || tok->kind == TokenKind::kPunct) {
          continue;
        }
      }
      cands.push_back({start, end, ei});
    }
  }
  if (cands.empty()) return result;

  // Union of candidate spans, for the "only tics before it" opener rule.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> covered;
  for (const auto& c : cands) covered.emplace_back(c.start, c.end);
  std::sort(covered.begin(), covered.end());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> merged;
  for (const auto& iv : covered) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  auto is_covered = [&](std::uint32_t b, std::uint32_t e) {
    for (const auto& [mb, me] : merged) {
      if (mb <= b && me >= e) return true;
      if (mb > b) break;
    }
    return false;
  };

  const std::size_t first_sentence_end = sentences.empty() ? 0 : sentences[0].end;
  auto passes_position = [&](const Candidate& c) {
    switch (entries[c.entry].position_rule) {
      case PositionRule::kAnywhere:
        return true;
      case PositionRule::kSentenceInitial:
        return std::binary_search(
            sentences.begin(), sentences.end(), SentenceSpan{c.start, 0},
            [](const SentenceSpan& a, const SentenceSpan& b) {
              return a.start < b.start;
            });
      case PositionRule::kResponseInitial: {
        if (c.start >= first_sentence_end) return false;
        for (const auto& tok : tokens) {
          if (tok.start >= c.start) break;
          if (tok.kind == TokenKind::kPunct) continue;
          if (!is_covered(tok.start, tok.end)) return false;
        }
        return true;
      }
    }
    return false;
  };

  std::vector<Candidate> kept;
  kept.reserve(cands.size());
  for (const auto& c : cands) {
    if (passes_position(c)) kept.push_back(c);
  }
  if (kept.empty()) return result;

  // Identical spans: position-specific rule, then category precedence, then
  // phrase order.
  auto priority = [&](const Candidate& c) {
    const auto& e = entries[c.entry];
    return std::make_tuple(e.position_rule == PositionRule::kAnywhere ? 1 : 0,
                           category_precedence(e.category),
                           std::string_view(e.phrase));
  };
  std::sort(kept.begin(), kept.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return priority(a) < priority(b);
  });
  std::vector<Candidate> unique_spans;
  for (const auto& c : kept) {
    if (!unique_spans.empty() && unique_spans.back().start == c.start &&
        unique_spans.back().end == c.end) {
      continue;
    }
    unique_spans.push_back(c);
  }

  // Same-category overlaps: leftmost, then longest.
  std::sort(unique_spans.begin(), unique_spans.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.start != b.start) return a.start < b.start;
              return a.end > b.end;
            });
  std::array<std::uint32_t, kAllCategories.size()> reach{};
  std::array<bool, kAllCategories.size()> seen{};
  for (const auto& c : unique_spans) {
    const auto cat = static_cast<std::size_t>(entries[c.entry].category);
    if (seen[cat] && c.start < reach[cat]) continue;
    seen[cat] = true;
    reach[cat] = c.end;
    result.push_back(TicMatch{record.id, &entries[c.entry], c.start, c.end,
                              entries[c.entry].category, std::nullopt});
  }
  std::sort(result.begin(), result.end(), [](const TicMatch& a, const TicMatch& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
  });
  return result;
}

// ---------------------------------------------------------------------------
// MatcherSet / scan_corpus

MatcherSet::MatcherSet(const TicLexicon& lexicon)
    : lexicon_hash_(lexicon.content_hash()) {
  if (lexicon.count(Language::kEn) > 0) {
    en_ = TicMatcher::compile(lexicon, Language::kEn);
  }
  if (lexicon.count(Language::kZh) > 0) {
    zh_ = TicMatcher::compile(lexicon, Language::kZh);
  }
}

const TicMatcher* MatcherSet::get(Language lang) const {
  const auto& m = lang == Language::kEn ? en_ : zh_;
  return m ? &*m : nullptr;
}

void require_languages(const Corpus& corpus, const MatcherSet& matchers) {
  for (auto lang : {Language::kEn, Language::kZh}) {
    const bool present = std::any_of(
        corpus.records().begin(), corpus.records().end(),
        [&](const ResponseRecord& r) { return r.language == lang; });
    if (present && matchers.get(lang) == nullptr) {
      throw ValidationError("corpus contains \"" +
                            std::string(to_string(lang)) +
                            "\" responses but the lexicon has no entries for it");
    }
  }
}

std::vector<ResponseScan> scan_corpus(const Corpus& corpus,
                                      const MatcherSet& matchers,
                                      const SegmentationLexicon* seg_lexicon,
                                      int threads) {
  require_languages(corpus, matchers);
  std::vector<ResponseScan> scans(corpus.size());
  internal::parallel_chunks(
      corpus.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto& rec = corpus[i];
          const auto tokens = tokenize(rec.text, rec.language, seg_lexicon);
          const auto sentences = split_sentences(rec.text, rec.language);
          scans[i].matches =
              scan_response(*matchers.get(rec.language), rec, tokens, sentences);
        }
      });
  return scans;
}

}  // namespace ticlens
