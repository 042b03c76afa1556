#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "debate/tasks.hpp"
#include "debate/util.hpp"

namespace debate {

enum class AnswerKind { number, letter, square, move, text };
enum class ParseStatus { ok, none_found, ambiguous_resolved };

std::string_view to_string(AnswerKind k);
std::string_view to_string(ParseStatus s);

/// An answer pulled out of free text. `value` is canonical: numbers via
/// format_number, letters A-D, squares like "e5", SAN without check marks.
struct ExtractedAnswer {
    AnswerKind kind = AnswerKind::text;
    std::string value;
    std::string raw_span;
    ParseStatus status = ParseStatus::ok;

    std::optional<double> number() const;

    /// Equality on the normalized value only.
    bool same_value(const ExtractedAnswer& o) const { return kind == o.kind && value == o.value; }
};

void to_json(json& j, const ExtractedAnswer& a);
void from_json(const json& j, ExtractedAnswer& a);

std::optional<ExtractedAnswer> extract_boxed_number(std::string_view text);
std::optional<ExtractedAnswer> extract_final_number(std::string_view text);
std::optional<ExtractedAnswer> extract_choice(std::string_view text);
std::optional<ExtractedAnswer> extract_square(std::string_view text);
std::optional<ExtractedAnswer> extract_move(std::string_view text);
std::optional<ExtractedAnswer> extract_text(std::string_view text);

/// Per-task extraction: boxed number with final-number fallback for the math
/// tasks, (X) choices for MMLU, squares, "14." moves, and whole text for
/// biographies.
std::optional<ExtractedAnswer> extract_answer(TaskKind kind, std::string_view text);

AnswerKind answer_kind_for(TaskKind kind);

/// Plurality by normalized value; unparseable entries are skipped; ties go
/// to the value held by the lowest index.
std::optional<ExtractedAnswer> majority_vote(std::span<const std::optional<ExtractedAnswer>> answers);

}  // namespace debate
