#include "debate/chat.hpp"

#include "debate/errors.hpp"

namespace debate {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw ParseError("unknown chat role '" + std::string(s) + "'");
}

void to_json(json& j, const ChatMessage& m) { j = json{{"role", to_string(m.role)}, {"content", m.content}}; }

void from_json(const json& j, ChatMessage& m) {
    m.role = parse_role(j.at("role").get<std::string>());
    m.content = j.at("content").get<std::string>();
}

void to_json(json& j, const SamplingParams& s) {
    j = json{{"temperature", s.temperature}, {"max_tokens", s.max_tokens}};
    j["seed"] = s.seed ? json(*s.seed) : json(nullptr);
}

void from_json(const json& j, SamplingParams& s) {
    s = SamplingParams{};
    if (j.contains("temperature")) s.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens")) s.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null()) s.seed = j.at("seed").get<std::int64_t>();
}

void to_json(json& j, const TokenCounts& t) { j = json{{"prompt", t.prompt}, {"completion", t.completion}}; }

void from_json(const json& j, TokenCounts& t) {
    t.prompt = j.value("prompt", 0);
    t.completion = j.value("completion", 0);
}

std::string_view to_string(PromptStyle s) { return s == PromptStyle::short_form ? "short" : "long"; }

PromptStyle parse_prompt_style(std::string_view s) {
    if (s == "short") return PromptStyle::short_form;
    if (s == "long") return PromptStyle::long_form;
    throw ConfigError("prompt_style must be 'short' or 'long', got '" + std::string(s) + "'");
}

}  // namespace debate
