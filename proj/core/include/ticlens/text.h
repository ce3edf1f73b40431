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

#ifndef TICLENS_TEXT_H_
#define TICLENS_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the tokenizer, the matcher and the statistics code.
namespace ticlens::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes the code point starting at `pos`. Invalid sequences decode to
// U+FFFD with length 1 so that scanning always makes progress.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* len);

// Start offset of the code point that ends right before `pos`.
std::size_t previous_cp_start(std::string_view s, std::size_t pos);

void append_utf8(std::string& out, char32_t cp);
bool is_valid_utf8(std::string_view s);
std::size_t count_code_points(std::string_view s);

// Case-folded copy of a source text together with the mapping back to it.
// origin[i] is the source byte offset of the code point that produced folded
// byte i; origin[text.size()] is the source length. Folding is per code point,
// so folded code point boundaries always map to source code point boundaries.
struct FoldedText {
  std::string text;
  std::vector<std::uint32_t> origin;
};

// Simple Unicode case folding. Typographic apostrophes (U+2018, U+2019) fold
// to ASCII '\'' so "It’s" and "It's" compare equal.
char32_t fold_cp(char32_t cp);
std::string fold(std::string_view s);
FoldedText fold_with_map(std::string_view s);

bool is_cjk(char32_t cp);        // ideographic code points (Han, CJK compat)
bool is_space(char32_t cp);      // Unicode White_Space
bool is_word_char(char32_t cp);  // alphanumeric and not CJK

std::string_view trim(std::string_view s);

// FNV-1a, used for content hashes and the local embedding provider.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace ticlens::text

#endif  // TICLENS_TEXT_H_
