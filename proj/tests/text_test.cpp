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

#include "geolink/text.hpp"

#include <random>

#include <gtest/gtest.h>

#include "geolink/error.hpp"

namespace geolink {
namespace {

TEST(NormalizeNameTest, FoldsCaseAndCollapsesWhitespace) {
  EXPECT_EQ(normalize_name("  New   York\tCity "), "new york city");
  EXPECT_EQ(normalize_name("TURKEY"), "turkey");
  EXPECT_EQ(normalize_name(""), "");
  EXPECT_EQ(normalize_name(" \t "), "");
}

TEST(NormalizeNameTest, KeepsDiacriticsAndAppliesNfkc) {
  EXPECT_EQ(normalize_name("SİNOP"), normalize_name("si\xCC\x87nop"));
  EXPECT_EQ(normalize_name("São Paulo"), "são paulo");
  // Composed and decomposed forms agree.
  EXPECT_EQ(normalize_name("Zu\xCC\x88rich"), normalize_name("Z\xC3\xBCrich"));
  // Full-width Latin folds to ASCII under NFKC.
  EXPECT_EQ(normalize_name("\xEF\xBC\xB4\xEF\xBC\xB2"), "tr");
  EXPECT_EQ(normalize_name("Straße"), "strasse");
  EXPECT_EQ(normalize_name("福島県いわき市"), "福島県いわき市");
}

TEST(NormalizeNameTest, Idempotent) {
  for (const char* s : {"İstanbul", "ΑΘΗΝΑ", "Ǆemal", "ﬁnland", "  a  b "}) {
    const std::string once = normalize_name(s);
    EXPECT_EQ(normalize_name(once), once) << s;
  }
}

TEST(EscapeTest, RoundTripsControlCharacters) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "ab\t\n\r\\ xé";
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    const std::string escaped = escape_field(s);
    EXPECT_EQ(escaped.find_first_of("\t\n\r"), std::string::npos);
    EXPECT_EQ(unescape_field(escaped), s);
  }
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_THROW(parse_double("1.5x"), InputError);
  EXPECT_THROW(parse_double(""), InputError);
  EXPECT_THROW(parse_int("12a"), InputError);
}

TEST(Utf8Test, DecodesAndReplacesMalformedBytes) {
  EXPECT_EQ(decode_utf8("aé福"), U"aé福");
  EXPECT_EQ(decode_utf8("a\xFF" "b"), U"a�" "b");
  EXPECT_EQ(decode_utf8("\xE7\xA6"), U"��");
  std::string out;
  append_utf8(U"aé福😀", out);
  EXPECT_EQ(out, "aé福😀");
}

TEST(SplitTest, KeepsEmptyFields) {
  auto f = split("a\t\tb\t", '\t');
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(f[3], "");
}

}  // namespace
}  // namespace geolink
