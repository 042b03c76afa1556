#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "debate/backends.hpp"
#include "debate/chat.hpp"
#include "debate/extract.hpp"
#include "debate/prompts.hpp"
#include "debate/tasks.hpp"

namespace debate {

enum class FinalRule { plurality, first_agent };

struct DebateConfig {
    int num_agents = 3;
    /// Debate rounds after the initial generation; 0 means a single generation.
    int num_rounds = 2;
    PromptStyle prompt_style = PromptStyle::long_form;
    bool summarize_others = false;
    /// Empty, or exactly num_agents entries.
    std::vector<std::string> personas;
    std::vector<std::string> backend_ids;
    SamplingParams sampling;
    /// Defaults to the first agent's backend when empty.
    std::string summarizer_backend_id;
    FinalRule final_rule = FinalRule::plurality;
    bool probe_confidence = false;
    bool chain_of_thought = false;
    /// Query the agents of one round in parallel.
    bool concurrent = true;

    /// Throws ConfigError naming the offending field. Backend ids are checked
    /// only when a registry is given.
    void validate(const BackendRegistry* registry = nullptr) const;

    /// Copy of this config with `backend_ids` resized to `n` agents by
    /// repeating the last entry and personas cycled or dropped.
    DebateConfig with_agents(int n) const;
};

void to_json(json& j, const DebateConfig& c);
void from_json(const json& j, DebateConfig& c);

struct AgentTurn {
    int agent_index = 0;
    History prompt_sent;
    std::string response;
    std::optional<ExtractedAnswer> answer;
    double latency_ms = 0.0;
    TokenCounts tokens;
    int attempts = 1;
    std::optional<std::string> confidence;
};

using Round = std::vector<AgentTurn>;

/// A summary generated for one agent in one round, and the agents it covers.
struct SummaryRecord {
    int round = 0;
    int for_agent = 0;
    std::vector<int> sources;
    std::string text;
};

struct TranscriptEvent {
    int round = 0;
    int agent = 0;
    std::string kind;
    std::string detail;
};

enum class DebateStatus { ok, failed };

struct Transcript {
    static constexpr int kSchemaVersion = 1;

    std::string debate_id;
    TaskInstance task;
    std::string method = "debate";
    DebateConfig config;
    std::vector<Round> rounds;
    std::vector<SummaryRecord> summaries;
    std::vector<TranscriptEvent> events;
    std::optional<ExtractedAnswer> final_answer;
    DebateStatus status = DebateStatus::ok;
    std::string error;
    std::string created_at;
    std::string catalog_version;
};

void to_json(json& j, const Transcript& t);
void from_json(const json& j, Transcript& t);

/// Content hash of (task id, method, config) including the sampling seed.
std::string make_debate_id(const std::string& task_id, const std::string& method, const DebateConfig& config);

/// Initial generation plus config.num_rounds rounds of debate. Backend
/// failures after retries produce a partial transcript with status failed.
Transcript run_debate(const TaskInstance& task, const DebateConfig& config, BackendRegistry& backends,
                      const std::string& method = "debate");

/// Single agent generation followed by `reflection_rounds` self-review turns.
Transcript run_reflection(const TaskInstance& task, const DebateConfig& config, BackendRegistry& backends,
                          int reflection_rounds);

/// Plurality over the round's extracted answers with lowest-index ties, or
/// agent 0's answer under FinalRule::first_agent.
std::optional<ExtractedAnswer> select_final_answer(const Round& round, FinalRule rule = FinalRule::plurality);

/// One backend call summarizing `responses` with the catalog's summarizer
/// instruction. Needs at least one response.
std::string summarize_responses(const std::vector<OtherResponse>& responses, const std::string& backend_id,
                                BackendRegistry& backends, const CallContext& ctx, const SamplingParams& sampling);

}  // namespace debate
