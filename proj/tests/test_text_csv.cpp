/*
 * Copyright (C) 2026 The episurv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "episurv/csv.hpp"
#include "episurv/text.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace episurv;

std::vector<std::vector<std::string>> read_rows(const std::string& data, char delim = ',')
{
    std::istringstream in(data);
    CsvReader reader(in, delim);
    std::vector<std::string_view> fields;
    std::vector<std::vector<std::string>> rows;
    while (reader.next(fields)) {
        rows.emplace_back(fields.begin(), fields.end());
    }
    return rows;
}

TEST(Text, TrimAndCase)
{
    EXPECT_EQ(text::trim("  a b \t"), "a b");
    EXPECT_EQ(text::trim(""), "");
    EXPECT_EQ(text::to_lower("ENTIDAD_Res"), "entidad_res");
    EXPECT_TRUE(text::iequals("Fecha_Def", "FECHA_DEF"));
    EXPECT_FALSE(text::iequals("EDAD", "EDADES"));
}

TEST(Text, Utf8Validation)
{
    EXPECT_TRUE(text::is_valid_utf8("Yucat\xC3\xA1n"));
    EXPECT_FALSE(text::is_valid_utf8("Yucat\xE1n"));
    EXPECT_FALSE(text::is_valid_utf8("\xC3"));
    EXPECT_EQ(text::latin1_to_utf8("Yucat\xE1n"), "Yucat\xC3\xA1n");
}

TEST(Text, ToUtf8RespectsEncoding)
{
    EXPECT_EQ(text::to_utf8("Le\xF3n", text::Encoding::Auto), "Le\xC3\xB3n");
    EXPECT_EQ(text::to_utf8("Le\xF3n", text::Encoding::Latin1), "Le\xC3\xB3n");
    EXPECT_EQ(text::to_utf8("Le\xF3n", text::Encoding::Utf8), "Le\xF3n");
    EXPECT_EQ(text::to_utf8("Le\xC3\xB3n", text::Encoding::Auto), "Le\xC3\xB3n");
}

TEST(Text, FoldIgnoresCaseAccentsAndPunctuation)
{
    EXPECT_EQ(text::fold("Atenci\xC3\xB3n ambulatoria en vivo"), "atencion ambulatoria en vivo");
    EXPECT_EQ(text::fold("Atenci\xF3n"), "atencion");
    EXPECT_EQ(text::fold("  Asintom\xC3\xA1tico - Ambulatorio "), "asintomatico ambulatorio");
    EXPECT_EQ(text::fold("YUCAT\xC3\x81N"), "yucatan");
}

TEST(Text, ParseInt)
{
    EXPECT_EQ(text::parse_int<int>(" 42 "), 42);
    EXPECT_EQ(text::parse_int<int>("+7"), 7);
    EXPECT_EQ(text::parse_int<int>("-3"), -3);
    EXPECT_FALSE(text::parse_int<int>("4x"));
    EXPECT_FALSE(text::parse_int<int>(""));
    EXPECT_FALSE(text::parse_int<int>("99999999999999999999"));
}

TEST(Text, IsoDates)
{
    auto d = text::parse_iso_date("2021-09-03");
    ASSERT_TRUE(d);
    EXPECT_EQ(text::format_date(*d), "2021-09-03");
    EXPECT_FALSE(text::parse_iso_date("2021-02-30"));
    EXPECT_FALSE(text::parse_iso_date("9999-99-99"));
    EXPECT_FALSE(text::parse_iso_date("03/09/2021"));
    EXPECT_TRUE(text::parse_iso_date("2020-02-29"));
}

TEST(Text, FixedTwoRoundsHalfUp)
{
    EXPECT_EQ(text::format_fixed2(36.25), "36.25");
    EXPECT_EQ(text::format_fixed2(0.125), "0.13");
    EXPECT_EQ(text::format_fixed2(2.675), "2.68");
    EXPECT_EQ(text::format_fixed2(1.005), "1.01");
    EXPECT_EQ(text::format_fixed2(100.0), "100.00");
    EXPECT_EQ(text::format_fixed2(0.0), "0.00");
    EXPECT_EQ(text::format_fixed2(-0.125), "-0.13");
    EXPECT_EQ(text::format_fixed2(-0.001), "0.00");
    EXPECT_EQ(text::format_fixed2(3321.0 / 21294.0 * 100.0), "15.60");
}

TEST(Csv, PlainRows)
{
    auto rows = read_rows("a,b,c\n1,2,3\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "2", "3"}));
}

TEST(Csv, EmptyFieldsAndTrailingDelimiter)
{
    auto rows = read_rows(",x,\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"", "x", ""}));
}

TEST(Csv, QuotedFieldsWithDelimitersAndEscapes)
{
    auto rows = read_rows("\"a,b\",\"say \"\"hi\"\"\",c\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"a,b", "say \"hi\"", "c"}));
}

TEST(Csv, QuotedFieldSpanningLines)
{
    std::istringstream in("x,\"two\nlines\",y\nnext,row,z\n");
    CsvReader reader(in);
    std::vector<std::string_view> f;
    ASSERT_TRUE(reader.next(f));
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[1], "two\nlines");
    EXPECT_EQ(reader.line(), 1u);
    ASSERT_TRUE(reader.next(f));
    EXPECT_EQ(f[0], "next");
    EXPECT_EQ(reader.line(), 3u);
}

TEST(Csv, CrLfBomAndBlankLines)
{
    auto rows = read_rows("\xEF\xBB\xBFh1,h2\r\n\r\n1,2\r\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0][0], "h1");
    EXPECT_EQ(rows[1][1], "2");
}

TEST(Csv, TabDelimiterAndResplit)
{
    std::istringstream in("a\tb,c\n1\t2,3\n");
    CsvReader reader(in);
    std::vector<std::string_view> f;
    ASSERT_TRUE(reader.next(f));
    EXPECT_EQ(f.size(), 2u);
    reader.resplit('\t', f);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[1], "b,c");
    ASSERT_TRUE(reader.next(f));
    EXPECT_EQ(f[0], "1");
}

TEST(Csv, ByteAccountingAndLimit)
{
    const std::string data = "ab\ncd\nef";
    {
        std::istringstream in(data);
        CsvReader reader(in);
        std::vector<std::string_view> f;
        while (reader.next(f)) {
        }
        EXPECT_EQ(reader.bytes_read(), data.size());
        EXPECT_EQ(reader.longest_row(), 2u);
    }
    {
        std::istringstream in(data);
        CsvReader reader(in, ',', 3);
        std::vector<std::string_view> f;
        ASSERT_TRUE(reader.next(f));
        EXPECT_EQ(f[0], "ab");
        EXPECT_FALSE(reader.next(f));
    }
}

TEST(Csv, BufferDoesNotGrowWithRowCount)
{
    std::string data;
    for (int i = 0; i < 20000; ++i) {
        data += "1234567890,abcdefghij,\"quoted, field\"\n";
    }
    std::istringstream in(data);
    CsvReader reader(in);
    std::vector<std::string_view> f;
    std::size_t rows = 0;
    std::size_t peak_after_first = 0;
    while (reader.next(f)) {
        if (++rows == 1) {
            peak_after_first = reader.peak_buffer_bytes();
        }
    }
    EXPECT_EQ(rows, 20000u);
    EXPECT_EQ(reader.peak_buffer_bytes(), peak_after_first);
}

} // namespace
