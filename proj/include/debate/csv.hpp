#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace debate::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader. Quoted fields may contain commas, doubled quotes and
/// line breaks. Returns each record with the 1-based line it started on.
struct Record {
    Row fields;
    std::size_t line = 0;
};
std::vector<Record> parse(std::string_view text, const std::string& source_name = "<csv>");

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace debate::csv
