#include "debate/csv.hpp"

#include "debate/errors.hpp"

namespace debate::csv {

std::vector<Record> parse(std::string_view text, const std::string& source_name) {
    std::vector<Record> out;
    Record cur;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    cur.line = 1;

    auto end_field = [&] {
        cur.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // a lone empty field is a blank line
        if (!(cur.fields.size() == 1 && cur.fields[0].empty())) out.push_back(std::move(cur));
        cur = Record{};
        cur.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty()) {
                    throw ParseError(source_name, line, "stray quote inside unquoted field");
                }
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                ++line;
                end_record();
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError(source_name, cur.line, "unterminated quoted field");
    if (field_started || !field.empty() || !cur.fields.empty()) end_record();
    return out;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(row[i]);
    }
    out += "\r\n";
    return out;
}

}  // namespace debate::csv
