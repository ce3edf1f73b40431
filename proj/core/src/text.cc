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

#include "ticlens/text.h"

#include <unicode/uchar.h>

#include <cstdio>

namespace ticlens::text {

char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    *len = 1;
    return b0;
  }
  std::size_t need;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
    min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
    min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
    min = 0x10000;
  } else {
    *len = 1;
    return kReplacementChar;
  }
  if (pos + need >= s.size()) {
    *len = 1;
    return kReplacementChar;
  }
  for (std::size_t i = 1; i <= need; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      *len = 1;
      return kReplacementChar;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    *len = 1;
    return kReplacementChar;
  }
  *len = need + 1;
  return cp;
}

std::size_t previous_cp_start(std::string_view s, std::size_t pos) {
  if (pos == 0) return 0;
  std::size_t p = pos - 1;
  int steps = 0;
  while (p > 0 && steps < 3 &&
         (static_cast<unsigned char>(s[p]) & 0xC0) == 0x80) {
    --p;
    ++steps;
  }
  std::size_t len = 0;
  decode_utf8(s, p, &len);
  // A stray continuation byte decodes as a single replacement char.
  if (p + len != pos) return pos - 1;
  return p;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_valid_utf8(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = 0;
    const char32_t cp = decode_utf8(s, pos, &len);
    if (cp == kReplacementChar) {
      // U+FFFD itself is valid when encoded as EF BF BD.
      if (len != 3) return false;
    }
    pos += len;
  }
  return true;
}

std::size_t count_code_points(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size();) {
    std::size_t len = 0;
    decode_utf8(s, pos, &len);
    pos += len;
    ++n;
  }
  return n;
}

char32_t fold_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  }
  if (cp == 0x2018 || cp == 0x2019) return U'\'';
  return static_cast<char32_t>(
      u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT));
}

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    const auto b = static_cast<unsigned char>(s[pos]);
    if (b < 0x80) {
      out.push_back(static_cast<char>(b >= 'A' && b <= 'Z' ? b + 32 : b));
      ++pos;
      continue;
    }
    std::size_t len = 0;
    append_utf8(out, fold_cp(decode_utf8(s, pos, &len)));
    pos += len;
  }
  return out;
}

FoldedText fold_with_map(std::string_view s) {
  FoldedText out;
  out.text.reserve(s.size());
  out.origin.reserve(s.size() + 1);
  for (std::size_t pos = 0; pos < s.size();) {
    const auto b = static_cast<unsigned char>(s[pos]);
    if (b < 0x80) {
      out.text.push_back(static_cast<char>(b >= 'A' && b <= 'Z' ? b + 32 : b));
      out.origin.push_back(static_cast<std::uint32_t>(pos));
      ++pos;
      continue;
    }
    std::size_t len = 0;
    const char32_t folded = fold_cp(decode_utf8(s, pos, &len));
    const std::size_t before = out.text.size();
    append_utf8(out.text, folded);
    out.origin.insert(out.origin.end(), out.text.size() - before,
                      static_cast<std::uint32_t>(pos));
    pos += len;
  }
  out.origin.push_back(static_cast<std::uint32_t>(s.size()));
  return out;
}

bool is_cjk(char32_t cp) {
  if (cp < 0x2E80) return false;
  return u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_IDEOGRAPHIC);
}

bool is_space(char32_t cp) {
  if (cp < 0x80) {
    return cp == ' ' || (cp >= '\t' && cp <= '\r');
  }
  return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= '0' && cp <= '9') || cp == '_';
  }
  return u_isalnum(static_cast<UChar32>(cp)) && !is_cjk(cp);
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e) {
    std::size_t len = 0;
    if (!is_space(decode_utf8(s, b, &len))) break;
    b += len;
  }
  while (e > b) {
    const std::size_t p = previous_cp_start(s, e);
    std::size_t len = 0;
    if (!is_space(decode_utf8(s, p, &len))) break;
    e = p;
  }
  return s.substr(b, e - b);
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ticlens::text
