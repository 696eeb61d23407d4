// Copyright 2026 The Geolink Authors.
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

#ifndef GEOLINK_TEXT_HPP_
#define GEOLINK_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace geolink {

// Identity form of a location name: Unicode NFKC, full case folding, trimmed,
// internal whitespace runs collapsed to one ASCII space. Diacritics survive.
// Invalid UTF-8 sequences are replaced with U+FFFD.
std::string normalize_name(std::string_view text);

// Escapes backslash, tab, newline and carriage return as \\ \t \n \r so the
// result fits in one TSV field.
std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

// Decodes UTF-8 into code points; malformed bytes become U+FFFD.
std::u32string decode_utf8(std::string_view text);
void append_utf8(std::u32string_view code_points, std::string& out);

// Shortest decimal representation that round-trips through parse_double.
std::string format_double(double value);
// Whole-string parse; throws InputError on trailing garbage or empty input.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

// 64-bit FNV-1a, used wherever a platform-independent hash is required.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// Strips a trailing '\r' left by CRLF files.
inline std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace geolink

#endif  // GEOLINK_TEXT_HPP_
