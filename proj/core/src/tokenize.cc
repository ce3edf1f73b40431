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

#include "ticlens/tokenize.h"

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/utext.h>

#include <fstream>
#include <memory>

#include "ticlens/error.h"
#include "ticlens/text.h"

namespace ticlens {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kWord: return "word";
    case TokenKind::kCjk: return "cjk";
    case TokenKind::kNumber: return "number";
    case TokenKind::kPunct: return "punct";
  }
  return "unknown";
}

SegmentationLexicon::SegmentationLexicon(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    if (w.empty()) throw ValidationError("segmentation lexicon: empty entry");
    for (std::size_t pos = 0; pos < w.size();) {
      std::size_t len = 0;
      if (text::is_space(text::decode_utf8(w, pos, &len))) {
        throw ValidationError("segmentation lexicon: entry \"" + w +
                              "\" contains whitespace");
      }
      pos += len;
    }
    max_code_points_ = std::max(max_code_points_, text::count_code_points(w));
    entries_.insert(w);
  }
}

SegmentationLexicon SegmentationLexicon::parse(std::istream& in,
                                               const std::string& source) {
  std::vector<std::string> words;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!text::is_valid_utf8(t)) {
      throw ValidationError(source + ":" + std::to_string(lineno) +
                            ": invalid UTF-8");
    }
    words.emplace_back(t);
  }
  return SegmentationLexicon(words);
}

SegmentationLexicon SegmentationLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open segmentation lexicon " + path.string());
  return parse(in, path.string());
}

namespace {

icu::BreakIterator& word_breaker() {
  thread_local std::unique_ptr<icu::BreakIterator> bi = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(
        icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !it) {
      throw InvariantError(std::string("ICU word break iterator: ") +
                           u_errorName(status));
    }
    return it;
  }();
  return *bi;
}

void push_token(std::string_view text, std::size_t b, std::size_t e,
                TokenKind kind, std::vector<Token>* out) {
  out->push_back(Token{std::string(text.substr(b, e - b)),
                       static_cast<std::uint32_t>(b),
                       static_cast<std::uint32_t>(e), kind});
}

// Splits a segment ICU reported as "none" (spaces, punctuation, symbols)
// into its non-whitespace runs.
void push_punct_runs(std::string_view text, std::size_t b, std::size_t e,
                     std::vector<Token>* out) {
  std::size_t run = std::string_view::npos;
  for (std::size_t pos = b; pos < e;) {
    std::size_t len = 0;
    const bool space = text::is_space(text::decode_utf8(text, pos, &len));
    if (space && run != std::string_view::npos) {
      push_token(text, run, pos, TokenKind::kPunct, out);
      run = std::string_view::npos;
    } else if (!space && run == std::string_view::npos) {
      run = pos;
    }
    pos += len;
  }
  if (run != std::string_view::npos) push_token(text, run, e, TokenKind::kPunct, out);
}

void tokenize_icu(std::string_view text, std::size_t base, std::size_t limit,
                  std::vector<Token>* out) {
  if (base >= limit) return;
  UErrorCode status = U_ZERO_ERROR;
  const std::string_view piece = text.substr(base, limit - base);
  UText* ut = utext_openUTF8(nullptr, piece.data(),
                             static_cast<int64_t>(piece.size()), &status);
  if (U_FAILURE(status)) {
    throw InvariantError(std::string("utext_openUTF8: ") + u_errorName(status));
  }
  auto& bi = word_breaker();
  bi.setText(ut, status);
  if (U_FAILURE(status)) {
    utext_close(ut);
    throw InvariantError(std::string("BreakIterator::setText: ") +
                         u_errorName(status));
  }
  std::int32_t start = bi.first();
  for (std::int32_t end = bi.next(); end != icu::BreakIterator::DONE;
       start = end, end = bi.next()) {
    const std::int32_t rule = bi.getRuleStatus();
    const std::size_t b = base + static_cast<std::size_t>(start);
    const std::size_t e = base + static_cast<std::size_t>(end);
    if (rule >= UBRK_WORD_NONE && rule < UBRK_WORD_NONE_LIMIT) {
      push_punct_runs(text, b, e, out);
    } else if (rule < UBRK_WORD_NUMBER_LIMIT) {
      push_token(text, b, e, TokenKind::kNumber, out);
    } else if (rule < UBRK_WORD_LETTER_LIMIT) {
      push_token(text, b, e, TokenKind::kWord, out);
    } else {
      push_token(text, b, e, TokenKind::kCjk, out);
    }
  }
  utext_close(ut);
}

void segment_cjk_run(std::string_view text, std::size_t b, std::size_t e,
                     const SegmentationLexicon* lexicon,
                     std::vector<Token>* out) {
  // Code point offsets of the run, plus the end sentinel.
  std::vector<std::size_t> cps;
  for (std::size_t pos = b; pos < e;) {
    std::size_t len = 0;
    text::decode_utf8(text, pos, &len);
    cps.push_back(pos);
    pos += len;
  }
  cps.push_back(e);
  const std::size_t n = cps.size() - 1;
  std::size_t i = 0;
  while (i < n) {
    std::size_t take = 1;
    if (lexicon != nullptr && !lexicon->empty()) {
      const std::size_t max_len = std::min(lexicon->max_code_points(), n - i);
      for (std::size_t len = max_len; len >= 2; --len) {
        if (lexicon->contains(std::string(
                text.substr(cps[i], cps[i + len] - cps[i])))) {
          take = len;
          break;
        }
      }
    }
    push_token(text, cps[i], cps[i + take], TokenKind::kCjk, out);
    i += take;
  }
}

bool is_closer(char32_t cp) {
  switch (cp) {
    case '"': case '\'': case ')': case ']': case '}':
    case 0x201D: case 0x2019: case 0x300D: case 0x300F: case 0xFF09:
    case 0x3011:
      return true;
    default:
      return false;
  }
}

bool is_fullwidth_terminator(char32_t cp) {
  return cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F || cp == 0xFF0E;
}

bool is_terminator(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || is_fullwidth_terminator(cp);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text, Language language,
                            const SegmentationLexicon* seg_lexicon,
                            TokenizeInfo* info) {
  std::vector<Token> out;
  out.reserve(text.size() / 4 + 1);
  if (language == Language::kEn) {
    tokenize_icu(text, 0, text.size(), &out);
    return out;
  }
  bool fell_back = false;
  std::size_t plain_start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 0;
    const char32_t cp = text::decode_utf8(text, pos, &len);
    if (!text::is_cjk(cp)) {
      pos += len;
      continue;
    }
    tokenize_icu(text, plain_start, pos, &out);
    const std::size_t run_start = pos;
    while (pos < text.size()) {
      const char32_t c = text::decode_utf8(text, pos, &len);
      if (!text::is_cjk(c)) break;
      pos += len;
    }
    if (seg_lexicon == nullptr || seg_lexicon->empty()) fell_back = true;
    segment_cjk_run(text, run_start, pos, seg_lexicon, &out);
    plain_start = pos;
  }
  tokenize_icu(text, plain_start, text.size(), &out);
  if (info != nullptr) info->per_character_fallback = fell_back;
  return out;
}

std::vector<SentenceSpan> split_sentences(std::string_view text,
                                          Language language) {
  std::vector<SentenceSpan> spans;
  bool in_sentence = false;
  std::size_t start = 0;
  std::size_t last_end = 0;  // end of the last non-whitespace code point
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 0;
    const char32_t cp = text::decode_utf8(text, pos, &len);
    if (text::is_space(cp)) {
      pos += len;
      continue;
    }
    if (!in_sentence) {
      in_sentence = true;
      start = pos;
    }
    pos += len;
    last_end = pos;
    if (!is_terminator(cp)) continue;

    bool fullwidth = is_fullwidth_terminator(cp);
    while (pos < text.size()) {
      const char32_t c = text::decode_utf8(text, pos, &len);
      if (!is_terminator(c) && !is_closer(c)) break;
      fullwidth = fullwidth || is_fullwidth_terminator(c);
      pos += len;
      last_end = pos;
    }
    bool boundary = fullwidth || pos >= text.size();
    if (!boundary) {
      const char32_t next = text::decode_utf8(text, pos, &len);
      boundary = text::is_space(next) ||
                 (language == Language::kZh && !text::is_word_char(next));
    }
    if (boundary) {
      spans.push_back({start, last_end});
      in_sentence = false;
    }
  }
  if (in_sentence) spans.push_back({start, last_end});
  return spans;
}

TermSequence extract_terms(const std::vector<Token>& tokens,
                           const std::vector<SentenceSpan>& sentences,
                           bool include_numbers) {
  TermSequence seq;
  seq.terms.reserve(tokens.size());
  std::size_t sent = 0;
  std::size_t current_sentence = static_cast<std::size_t>(-1);
  for (const auto& tok : tokens) {
    if (tok.kind == TokenKind::kPunct) continue;
    if (tok.kind == TokenKind::kNumber && !include_numbers) continue;
    while (sent + 1 < sentences.size() && tok.start >= sentences[sent].end) {
      ++sent;
    }
    if (sent != current_sentence) {
      seq.sentence_starts.push_back(static_cast<std::uint32_t>(seq.terms.size()));
      current_sentence = sent;
    }
    seq.terms.push_back(text::fold(tok.surface));
  }
  return seq;
}

}  // namespace ticlens
