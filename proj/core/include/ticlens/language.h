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

#ifndef TICLENS_LANGUAGE_H_
#define TICLENS_LANGUAGE_H_

#include <optional>
#include <string_view>

namespace ticlens {

enum class Language { kEn, kZh };

constexpr std::string_view to_string(Language lang) {
  return lang == Language::kEn ? "en" : "zh";
}

constexpr std::optional<Language> parse_language(std::string_view s) {
  if (s == "en") return Language::kEn;
  if (s == "zh") return Language::kZh;
  return std::nullopt;
}

}  // namespace ticlens

#endif  // TICLENS_LANGUAGE_H_
