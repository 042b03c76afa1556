#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "debate/util.hpp"

namespace debate {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using History = std::vector<ChatMessage>;

void to_json(json& j, const ChatMessage& m);
void from_json(const json& j, ChatMessage& m);

struct SamplingParams {
    double temperature = 1.0;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;
};

void to_json(json& j, const SamplingParams& s);
void from_json(const json& j, SamplingParams& s);

struct TokenCounts {
    int prompt = 0;
    int completion = 0;
};

void to_json(json& j, const TokenCounts& t);
void from_json(const json& j, TokenCounts& t);

enum class PromptStyle { short_form, long_form };

std::string_view to_string(PromptStyle s);
PromptStyle parse_prompt_style(std::string_view s);

}  // namespace debate
