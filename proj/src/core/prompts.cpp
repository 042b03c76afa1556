#include "debate/prompts.hpp"

#include "catalog_embed.hpp"
#include "debate/chess.hpp"
#include "debate/errors.hpp"

namespace debate {
namespace {

std::string key(TaskKind kind, PromptPhase phase, PromptStyle style) {
    std::string k = "templates." + std::string(to_string(kind));
    if (phase == PromptPhase::start) return k + ".start";
    return k + ".debate." + std::string(to_string(style));
}

std::string operand(std::int64_t v) { return std::to_string(v); }

}  // namespace

const PromptCatalog& PromptCatalog::builtin() {
    static const PromptCatalog cat = from_json(json::parse(detail::kBuiltinCatalog));
    return cat;
}

PromptCatalog PromptCatalog::from_json(const json& j) {
    PromptCatalog c;
    if (!j.contains("version") || !j.contains("templates") || !j.contains("shared")) {
        throw ConfigError("prompt catalog: missing version, templates or shared");
    }
    c.version_ = j.at("version").get<std::string>();
    for (const auto& [kind, entry] : j.at("templates").items()) {
        parse_task_kind(kind);
        c.entries_["templates." + kind + ".start"] = entry.at("start").get<std::string>();
        for (const auto& [style, text] : entry.at("debate").items()) {
            parse_prompt_style(style);
            c.entries_["templates." + kind + ".debate." + style] = text.get<std::string>();
        }
    }
    for (const auto& [name, text] : j.at("shared").items()) c.entries_["shared." + name] = text.get<std::string>();
    return c;
}

PromptCatalog PromptCatalog::load(const std::string& path) {
    try {
        return from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError("prompt catalog " + path + ": " + e.what());
    }
}

const std::string& PromptCatalog::get(TaskKind kind, PromptPhase phase, PromptStyle style) const {
    auto it = entries_.find(key(kind, phase, style));
    if (it == entries_.end()) throw UnknownTaskKind("no prompt template for " + key(kind, phase, style));
    return it->second;
}

const std::string& PromptCatalog::shared(std::string_view name) const {
    auto it = entries_.find("shared." + std::string(name));
    if (it == entries_.end()) throw ConfigError("prompt catalog has no shared entry '" + std::string(name) + "'");
    return it->second;
}

std::string task_statement(const TaskInstance& task) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ArithmeticTask>) return render_expression(p.operands);
            else if constexpr (std::is_same_v<T, Gsm8kTask>) return p.question;
            else if constexpr (std::is_same_v<T, ChessMoveTask>) return chess::movetext(p.san_moves);
            else if constexpr (std::is_same_v<T, BiographyTask>) return p.person;
            else if constexpr (std::is_same_v<T, MmluTask>) return p.question;
            else return p.moves;
        },
        task.payload);
}

std::vector<ChatMessage> build_initial_prompt(const TaskInstance& task, const std::optional<std::string>& persona,
                                              bool chain_of_thought, const PromptCatalog& catalog) {
    const std::string& tmpl = catalog.get(task.kind(), PromptPhase::start);
    std::string text = std::visit(
        [&](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ArithmeticTask>) {
                std::vector<std::string> ops;
                for (auto v : p.operands) ops.push_back(operand(v));
                return fill_template(tmpl, ops);
            } else if constexpr (std::is_same_v<T, Gsm8kTask>) {
                return fill_template(tmpl, {}, {{"Problem", p.question}});
            } else if constexpr (std::is_same_v<T, ChessMoveTask>) {
                return fill_template(tmpl, {}, {{"moves", chess::movetext(p.san_moves)}});
            } else if constexpr (std::is_same_v<T, BiographyTask>) {
                return fill_template(tmpl, {p.person});
            } else if constexpr (std::is_same_v<T, MmluTask>) {
                return fill_template(tmpl, {p.question, p.options[0], p.options[1], p.options[2], p.options[3]});
            } else {
                return fill_template(tmpl, {p.moves, p.square});
            }
        },
        task.payload);
    if (chain_of_thought) text += " " + catalog.shared("chain_of_thought");

    std::vector<ChatMessage> out;
    if (persona && !persona->empty()) {
        out.push_back({Role::system, fill_template(catalog.shared("persona"), {}, {{"persona", *persona}})});
    }
    out.push_back({Role::user, std::move(text)});
    return out;
}

std::string render_context(const std::vector<OtherResponse>& others, const std::optional<std::string>& summary,
                           const PromptCatalog& catalog) {
    if (summary) return fill_template(catalog.shared("summary_block"), {}, {{"summary", *summary}});
    std::string out;
    for (const auto& o : others) {
        out += fill_template(catalog.shared("agent_block"), {},
                             {{"ordinal", std::to_string(o.agent_index)}, {"response", o.text}});
    }
    return out;
}

ChatMessage build_debate_prompt(const TaskInstance& task, const std::vector<OtherResponse>& others, PromptStyle style,
                                const std::optional<std::string>& summary, const PromptCatalog& catalog) {
    if (others.empty() && !summary) throw EmptyContext("debate prompt needs other responses or a summary");
    const std::string& tmpl = catalog.get(task.kind(), PromptPhase::debate, style);
    std::string ctx = render_context(others, summary, catalog);
    std::map<std::string, std::string> named{{"other agent responses", ctx}, {"other agent response", ctx}};
    std::vector<std::string> positional;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Gsm8kTask>) named["Problem"] = p.question;
            else if constexpr (std::is_same_v<T, ChessMoveTask>) positional.push_back(chess::movetext(p.san_moves));
            else if constexpr (std::is_same_v<T, BiographyTask>) named["person"] = p.person;
        },
        task.payload);
    return {Role::user, fill_template(tmpl, positional, named)};
}

ChatMessage build_summary_request(const std::vector<OtherResponse>& responses, const PromptCatalog& catalog) {
    if (responses.empty()) throw EmptyContext("nothing to summarize");
    return {Role::user, catalog.shared("summarize") + render_context(responses, std::nullopt, catalog)};
}

ChatMessage build_reflection_prompt(const PromptCatalog& catalog) { return {Role::user, catalog.shared("reflection")}; }

ChatMessage build_confidence_prompt(std::string_view answer, const PromptCatalog& catalog) {
    return {Role::user, fill_template(catalog.shared("confidence"), {}, {{"answer", std::string(answer)}})};
}

ChatMessage build_judge_prompt(std::string_view person, std::string_view biography, std::string_view fact,
                               const PromptCatalog& catalog) {
    return {Role::user, fill_template(catalog.shared("judge"), {},
                                      {{"person", std::string(person)},
                                       {"biography", std::string(biography)},
                                       {"fact", std::string(fact)}})};
}

}  // namespace debate
