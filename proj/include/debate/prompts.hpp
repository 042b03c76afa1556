#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "debate/chat.hpp"
#include "debate/tasks.hpp"

namespace debate {

enum class PromptPhase { start, debate };

/// Versioned set of prompt templates keyed by (task kind, phase, style), plus
/// the shared snippets used for summaries, reflection, personas, confidence
/// probes and the biography judge.
class PromptCatalog {
public:
    /// The catalog compiled into the library from prompts/catalog.json.
    static const PromptCatalog& builtin();
    static PromptCatalog from_json(const json& j);
    static PromptCatalog load(const std::string& path);

    const std::string& version() const { return version_; }
    /// Start templates ignore `style`.
    const std::string& get(TaskKind kind, PromptPhase phase, PromptStyle style = PromptStyle::long_form) const;
    const std::string& shared(std::string_view name) const;

private:
    std::string version_;
    std::map<std::string, std::string> entries_;
};

struct OtherResponse {
    int agent_index = 0;
    std::string text;
};

std::vector<ChatMessage> build_initial_prompt(const TaskInstance& task, const std::optional<std::string>& persona,
                                              bool chain_of_thought = false,
                                              const PromptCatalog& catalog = PromptCatalog::builtin());

/// Throws EmptyContext when `others` is empty and no summary is given. A
/// summary takes precedence over raw responses.
ChatMessage build_debate_prompt(const TaskInstance& task, const std::vector<OtherResponse>& others, PromptStyle style,
                                const std::optional<std::string>& summary,
                                const PromptCatalog& catalog = PromptCatalog::builtin());

/// The context block embedded in a debate prompt: either one delimited block
/// per response in the given order, or a single summary block.
std::string render_context(const std::vector<OtherResponse>& others, const std::optional<std::string>& summary,
                           const PromptCatalog& catalog = PromptCatalog::builtin());

ChatMessage build_summary_request(const std::vector<OtherResponse>& responses,
                                  const PromptCatalog& catalog = PromptCatalog::builtin());
ChatMessage build_reflection_prompt(const PromptCatalog& catalog = PromptCatalog::builtin());
ChatMessage build_confidence_prompt(std::string_view answer, const PromptCatalog& catalog = PromptCatalog::builtin());
ChatMessage build_judge_prompt(std::string_view person, std::string_view biography, std::string_view fact,
                               const PromptCatalog& catalog = PromptCatalog::builtin());

/// Human-readable statement of the task used where templates restate it.
std::string task_statement(const TaskInstance& task);

}  // namespace debate
