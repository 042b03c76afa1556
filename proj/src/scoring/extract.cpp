#include "debate/extract.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <vector>

namespace debate {
namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

struct NumberToken {
    double value = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Standalone numbers: not glued to a preceding letter/digit, optional sign,
// optional "$", thousands groups "1,200", optional decimal part.
std::vector<NumberToken> scan_numbers(std::string_view s) {
    std::vector<NumberToken> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_digit(s[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (start > 0 && (is_alnum(s[start - 1]) || s[start - 1] == '_' || s[start - 1] == '.')) {
            while (i < s.size() && is_digit(s[i])) ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && is_digit(s[j])) ++j;
        std::string digits(s.substr(i, j - i));
        // thousands groups only directly after 1-3 leading digits
        if (j - i <= 3) {
            while (j + 3 < s.size() && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) && is_digit(s[j + 3]) &&
                   (j + 4 >= s.size() || !is_digit(s[j + 4]))) {
                digits += s.substr(j + 1, 3);
                j += 4;
            }
        }
        if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
            std::size_t k = j + 1;
            while (k < s.size() && is_digit(s[k])) ++k;
            digits += s.substr(j, k - j);
            j = k;
        }
        // sign and currency prefixes
        std::size_t b = start;
        if (b > 0 && s[b - 1] == '$') --b;
        bool negative = false;
        if (b > 0 && s[b - 1] == '-') {
            std::size_t before = b - 1;
            if (before == 0 || std::isspace(static_cast<unsigned char>(s[before - 1])) ||
                std::string_view("(=:[{,$").find(s[before - 1]) != std::string_view::npos) {
                negative = true;
                b = before;
            }
        }
        double v = std::stod(digits);
        out.push_back({negative ? -v : v, b, j});
        i = j;
    }
    return out;
}

ExtractedAnswer number_answer(double v, std::string_view raw, ParseStatus status) {
    return {AnswerKind::number, format_number(v), std::string(raw), status};
}

// Content of each "\boxed{...}" with balanced braces.
std::vector<std::pair<std::size_t, std::string>> boxed_contents(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::size_t pos = 0;
    while ((pos = text.find("\\boxed", pos)) != std::string_view::npos) {
        std::size_t i = pos + 6;
        while (i < text.size() && text[i] == ' ') ++i;
        if (i >= text.size() || text[i] != '{') {
            pos = i;
            continue;
        }
        int depth = 0;
        std::size_t j = i;
        for (; j < text.size(); ++j) {
            if (text[j] == '{') ++depth;
            else if (text[j] == '}' && --depth == 0) break;
        }
        if (j >= text.size()) break;
        out.emplace_back(pos, std::string(text.substr(i + 1, j - i - 1)));
        pos = j + 1;
    }
    return out;
}

std::optional<double> parse_boxed_content(std::string c) {
    static const std::regex text_cmd(R"(\\(?:text|textbf|mathrm|mbox)\{([^{}]*)\})");
    for (std::string_view junk : {"\\$", "\\%", "\\!", "\\,", "\\;", "$", "%"}) c = replace_all(c, junk, "");
    const std::string math = std::regex_replace(c, text_cmd, " ");
    if (std::any_of(math.begin(), math.end(), [](char ch) { return std::isalpha(static_cast<unsigned char>(ch)); })) {
        return std::nullopt;
    }
    c = std::regex_replace(c, text_cmd, "$1");
    c = trim(c);
    while (c.size() >= 2 && c.front() == '{' && c.back() == '}') c = trim(c.substr(1, c.size() - 2));
    while (!c.empty() && c.back() == '.') c.pop_back();
    auto nums = scan_numbers(c);
    if (nums.size() != 1) return std::nullopt;
    return nums.front().value;
}

const std::regex& san_regex() {
    static const std::regex re(R"(^(O-O(-O)?|[KQRBN][a-h]?[1-8]?x?[a-h][1-8]|[a-h](x[a-h])?[1-8](=?[QRBN])?)$)");
    return re;
}

}  // namespace

std::string_view to_string(AnswerKind k) {
    switch (k) {
        case AnswerKind::number: return "number";
        case AnswerKind::letter: return "letter";
        case AnswerKind::square: return "square";
        case AnswerKind::move: return "move";
        case AnswerKind::text: return "text";
    }
    return "text";
}

std::string_view to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::ok: return "ok";
        case ParseStatus::none_found: return "none_found";
        case ParseStatus::ambiguous_resolved: return "ambiguous_resolved";
    }
    return "ok";
}

std::optional<double> ExtractedAnswer::number() const {
    if (kind != AnswerKind::number) return std::nullopt;
    return std::stod(value);
}

void to_json(json& j, const ExtractedAnswer& a) {
    j = json{{"kind", to_string(a.kind)}, {"value", a.value}, {"raw", a.raw_span}, {"status", to_string(a.status)}};
}

void from_json(const json& j, ExtractedAnswer& a) {
    const auto kind = j.at("kind").get<std::string>();
    a.kind = kind == "number"   ? AnswerKind::number
             : kind == "letter" ? AnswerKind::letter
             : kind == "square" ? AnswerKind::square
             : kind == "move"   ? AnswerKind::move
                                : AnswerKind::text;
    a.value = j.at("value").get<std::string>();
    a.raw_span = j.value("raw", std::string{});
    const auto status = j.value("status", std::string("ok"));
    a.status = status == "none_found"           ? ParseStatus::none_found
               : status == "ambiguous_resolved" ? ParseStatus::ambiguous_resolved
                                                : ParseStatus::ok;
}

std::optional<ExtractedAnswer> extract_boxed_number(std::string_view text) {
    auto boxes = boxed_contents(text);
    if (boxes.empty()) return std::nullopt;
    auto v = parse_boxed_content(boxes.back().second);
    if (!v) return std::nullopt;
    std::set<std::string> distinct;
    for (const auto& [_, c] : boxes) {
        if (auto x = parse_boxed_content(c)) distinct.insert(format_number(*x));
    }
    return number_answer(*v, "\\boxed{" + boxes.back().second + "}",
                         distinct.size() > 1 ? ParseStatus::ambiguous_resolved : ParseStatus::ok);
}

std::optional<ExtractedAnswer> extract_final_number(std::string_view text) {
    auto nums = scan_numbers(text);
    if (nums.empty()) return std::nullopt;
    const auto& last = nums.back();
    bool distinct = std::any_of(nums.begin(), nums.end(), [&](const auto& n) { return n.value != last.value; });
    return number_answer(last.value, text.substr(last.begin, last.end - last.begin),
                         distinct ? ParseStatus::ambiguous_resolved : ParseStatus::ok);
}

std::optional<ExtractedAnswer> extract_choice(std::string_view text) {
    std::optional<ExtractedAnswer> found;
    std::set<char> seen;
    for (std::size_t i = 0; i + 2 < text.size(); ++i) {
        if (text[i] == '(' && text[i + 2] == ')' && text[i + 1] >= 'A' && text[i + 1] <= 'D') {
            seen.insert(text[i + 1]);
            found = ExtractedAnswer{AnswerKind::letter, std::string(1, text[i + 1]), std::string(text.substr(i, 3))};
        }
    }
    if (found) {
        if (seen.size() > 1) found->status = ParseStatus::ambiguous_resolved;
        return found;
    }
    static const std::regex fallback(R"((?:answer is|answer:)\s*:?\s*\(?([A-D])\b)", std::regex::icase);
    std::string s(text);
    std::optional<ExtractedAnswer> last;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), fallback); it != std::sregex_iterator(); ++it) {
        const std::string letter = (*it)[1].str();
        if (letter[0] < 'A' || letter[0] > 'D') continue;  // icase lets lowercase through
        last = ExtractedAnswer{AnswerKind::letter, letter, it->str()};
    }
    return last;
}

std::optional<ExtractedAnswer> extract_square(std::string_view text) {
    auto lines = split_lines(text);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string line = trim(*it);
        if (line.empty()) continue;
        static const std::regex final_line(
            R"(^[*_`"' ]*(?:(?:final answer|answer)\s*[:\-]?\s*)?[*_`"' ]*\(?([a-h][1-8])\)?[*_`"' ]*[.!]?[*_`"' ]*$)",
            std::regex::icase);
        std::smatch m;
        if (std::regex_match(line, m, final_line)) {
            std::string sq = to_lower(m[1].str());
            return ExtractedAnswer{AnswerKind::square, sq, line};
        }
        break;  // only the final non-empty line is eligible
    }
    static const std::regex marked(R"(answer\s*(?:is)?\s*[:\-]?\s*\(?([a-hA-H][1-8])\b)", std::regex::icase);
    std::optional<ExtractedAnswer> tagged;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), marked); it != std::sregex_iterator(); ++it) {
        tagged = ExtractedAnswer{AnswerKind::square, to_lower((*it)[1].str()), it->str()};
    }
    if (tagged) return tagged;
    std::optional<ExtractedAnswer> last;
    for (std::size_t i = 0; i + 3 < text.size(); ++i) {
        if (text[i] == '(' && text[i + 3] == ')' && text[i + 1] >= 'a' && text[i + 1] <= 'h' && text[i + 2] >= '1' &&
            text[i + 2] <= '8') {
            last = ExtractedAnswer{AnswerKind::square, std::string(text.substr(i + 1, 2)), std::string(text.substr(i, 4))};
        }
    }
    return last;
}

std::optional<ExtractedAnswer> extract_move(std::string_view text) {
    std::size_t marker = std::string_view::npos;
    for (std::size_t pos = text.find("14."); pos != std::string_view::npos; pos = text.find("14.", pos + 1)) {
        if (pos > 0 && (is_digit(text[pos - 1]) || text[pos - 1] == '.')) continue;
        if (pos + 3 < text.size() && is_digit(text[pos + 3])) continue;
        marker = pos;
    }
    if (marker == std::string_view::npos) return std::nullopt;
    std::size_t i = marker + 3;
    while (i < text.size() && (text[i] == '.' || text[i] == ' ' || text[i] == '\t')) ++i;
    while (i < text.size() && std::string_view("<*`\"'").find(text[i]) != std::string_view::npos) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
           std::string_view(",;)>\"'`*").find(text[j]) == std::string_view::npos)
        ++j;
    std::string tok(text.substr(i, j - i));
    while (!tok.empty() && std::string_view(".,:;!?+#").find(tok.back()) != std::string_view::npos) tok.pop_back();
    if (tok == "0-0") tok = "O-O";
    if (tok == "0-0-0") tok = "O-O-O";
    if (tok.empty() || !std::regex_match(tok, san_regex())) return std::nullopt;
    return ExtractedAnswer{AnswerKind::move, tok, std::string(text.substr(marker, j - marker))};
}

std::optional<ExtractedAnswer> extract_text(std::string_view text) {
    std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    return ExtractedAnswer{AnswerKind::text, t, t};
}

AnswerKind answer_kind_for(TaskKind kind) {
    switch (kind) {
        case TaskKind::arithmetic:
        case TaskKind::gsm8k: return AnswerKind::number;
        case TaskKind::mmlu: return AnswerKind::letter;
        case TaskKind::chess_validity: return AnswerKind::square;
        case TaskKind::chess_move: return AnswerKind::move;
        case TaskKind::biography: return AnswerKind::text;
    }
    return AnswerKind::text;
}

std::optional<ExtractedAnswer> extract_answer(TaskKind kind, std::string_view text) {
    switch (kind) {
        case TaskKind::arithmetic:
        case TaskKind::gsm8k:
            if (auto boxed = extract_boxed_number(text)) return boxed;
            return extract_final_number(text);
        case TaskKind::mmlu: return extract_choice(text);
        case TaskKind::chess_validity: return extract_square(text);
        case TaskKind::chess_move: return extract_move(text);
        case TaskKind::biography: return extract_text(text);
    }
    return std::nullopt;
}

std::optional<ExtractedAnswer> majority_vote(std::span<const std::optional<ExtractedAnswer>> answers) {
    std::map<std::string, int> tally;
    for (const auto& a : answers) {
        if (a) ++tally[a->value];
    }
    if (tally.empty()) return std::nullopt;
    int best = 0;
    for (const auto& [_, n] : tally) best = std::max(best, n);
    for (const auto& a : answers) {
        if (a && tally[a->value] == best) return a;
    }
    return std::nullopt;
}

}  // namespace debate
