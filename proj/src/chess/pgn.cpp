#include <cctype>

#include "debate/chess.hpp"
#include "debate/errors.hpp"

namespace debate::chess {
namespace {

bool is_result(std::string_view tok) {
    return tok == "1-0" || tok == "0-1" || tok == "1/2-1/2" || tok == "*";
}

// Strips a leading move number ("12." / "12..." / "12...Nf3").
std::string_view strip_move_number(std::string_view tok) {
    std::size_t i = 0;
    while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) ++i;
    if (i == 0 || i == tok.size() || tok[i] != '.') return tok;
    while (i < tok.size() && tok[i] == '.') ++i;
    return tok.substr(i);
}

}  // namespace

std::vector<PgnGame> parse_pgn(std::string_view text, const std::string& source_name) {
    std::vector<PgnGame> games;
    PgnGame cur;
    bool in_game = false;
    std::size_t line = 1;
    int variation_depth = 0;

    auto finish = [&](std::string result) {
        cur.result = std::move(result);
        games.push_back(std::move(cur));
        cur = PgnGame{};
        in_game = false;
    };
    auto begin_if_needed = [&] {
        if (!in_game) {
            in_game = true;
            cur.line = line;
        }
    };

    std::size_t i = 0;
    bool at_line_start = true;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            at_line_start = true;
            continue;
        }
        if (at_line_start && c == '%') {  // escape line
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        at_line_start = false;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '[' && variation_depth == 0) {
            if (in_game && !cur.san_moves.empty()) {
                // a new tag section without a result terminator
                finish("*");
            }
            begin_if_needed();
            auto close = text.find(']', i);
            if (close == std::string_view::npos) throw PgnParseError(source_name, line, "unterminated tag pair");
            std::string_view body = text.substr(i + 1, close - i - 1);
            auto sp = body.find(' ');
            auto q1 = body.find('"');
            auto q2 = body.rfind('"');
            if (sp == std::string_view::npos || q1 == std::string_view::npos || q2 <= q1) {
                throw PgnParseError(source_name, line, "malformed tag pair");
            }
            cur.tags[std::string(body.substr(0, sp))] = std::string(body.substr(q1 + 1, q2 - q1 - 1));
            i = close + 1;
            continue;
        }
        if (c == '{') {
            auto close = text.find('}', i);
            if (close == std::string_view::npos) throw PgnParseError(source_name, line, "unterminated comment");
            for (std::size_t k = i; k < close; ++k) {
                if (text[k] == '\n') ++line;
            }
            i = close + 1;
            continue;
        }
        if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == '(') {
            ++variation_depth;
            ++i;
            continue;
        }
        if (c == ')') {
            if (variation_depth == 0) throw PgnParseError(source_name, line, "unbalanced ')'");
            --variation_depth;
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
               std::string_view("{}();[").find(text[j]) == std::string_view::npos)
            ++j;
        std::string_view tok = text.substr(i, j - i);
        i = j;
        if (variation_depth > 0) continue;
        begin_if_needed();
        if (is_result(tok)) {
            finish(std::string(tok));
            continue;
        }
        if (tok[0] == '$') continue;  // NAG
        tok = strip_move_number(tok);
        if (tok.empty()) continue;
        if (std::isdigit(static_cast<unsigned char>(tok[0])) && tok != "0-0" && tok != "0-0-0") {
            throw PgnParseError(source_name, line, "unexpected token '" + std::string(tok) + "'");
        }
        std::string san(tok);
        while (!san.empty() && (san.back() == '!' || san.back() == '?')) san.pop_back();
        if (!san.empty()) cur.san_moves.push_back(std::move(san));
    }
    if (variation_depth != 0) throw PgnParseError(source_name, line, "unterminated variation");
    if (in_game && (!cur.san_moves.empty() || !cur.tags.empty())) finish("*");
    return games;
}

}  // namespace debate::chess
