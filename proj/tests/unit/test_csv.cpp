#include <gtest/gtest.h>

#include "debate/csv.hpp"
#include "debate/errors.hpp"

using namespace debate;

TEST(Csv, QuotedFieldsAndLineNumbers) {
    auto recs = csv::parse("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\"multi\nline\",z\n");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[1].fields[0], "x, y");
    EXPECT_EQ(recs[1].fields[1], "he said \"hi\"");
    EXPECT_EQ(recs[2].fields[0], "multi\nline");
    EXPECT_EQ(recs[2].line, 3u);
}

TEST(Csv, EmptyFieldsAndCrlf) {
    auto recs = csv::parse("a,,c\r\n,,\r\n");
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].fields, (csv::Row{"a", "", "c"}));
    EXPECT_EQ(recs[1].fields, (csv::Row{"", "", ""}));
}

TEST(Csv, UnterminatedQuoteThrows) { EXPECT_THROW(csv::parse("\"abc\n"), ParseError); }

TEST(Csv, EscapeRoundTrip) {
    const csv::Row row{"plain", "with,comma", "with \"quote\"", "line\nbreak", ""};
    EXPECT_EQ(csv::escape("plain"), "plain");
    EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
    auto back = csv::parse(csv::format_row(row));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].fields, row);
}
