#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "debate/chat.hpp"
#include "debate/tasks.hpp"
#include "debate/util.hpp"

namespace debate {

enum class CallPhase { start, debate, reflection, summary, confidence, judge };

std::string_view to_string(CallPhase p);

/// What the engine knows about a call beyond the message list. Scripted
/// backends use it to stay deterministic per (debate, agent, round); HTTP
/// backends ignore it.
struct CallContext {
    std::string debate_id;
    const TaskInstance* task = nullptr;
    int agent_index = 0;
    int round = 0;
    CallPhase phase = CallPhase::start;
    PromptStyle style = PromptStyle::long_form;
    /// Texts embedded in the prompt as other agents' context: raw responses in
    /// agent order, or a single summary.
    std::vector<std::string> context;
    bool summarized = false;
};

struct Completion {
    std::string text;
    TokenCounts tokens;
    int attempts = 1;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual Completion complete(const CallContext& ctx, const History& history, const SamplingParams& sampling) = 0;
    virtual std::string model() const = 0;
};

struct RetryPolicy {
    int max_retries = 4;
    std::chrono::milliseconds base_delay{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_delay{30000};
};

/// Sliding-window limiter: at most `limit` dispatches in any window of
/// length `interval`.
class RateLimiter {
public:
    RateLimiter(int limit, Clock::duration interval, Clock& clock);
    void acquire();

private:
    int limit_;
    Clock::duration interval_;
    Clock& clock_;
    std::mutex mu_;
    std::deque<Clock::time_point> sent_;
};

/// Backend identifiers mapped to instances, each wrapped with optional rate
/// limiting and bounded retry on transient errors.
class BackendRegistry {
public:
    explicit BackendRegistry(Clock& clock = system_clock());
    BackendRegistry(const BackendRegistry&) = delete;
    BackendRegistry& operator=(const BackendRegistry&) = delete;

    /// Builds backends from a JSON object mapping id to spec, e.g.
    /// {"gpt": {"kind": "chat_http", "model": "...", "endpoint": "..."}}.
    static std::unique_ptr<BackendRegistry> from_json(const json& specs, Clock& clock = system_clock());

    void add(const std::string& id, std::shared_ptr<Backend> backend, RetryPolicy retry = {},
             std::optional<std::pair<int, Clock::duration>> rate_limit = std::nullopt);
    bool contains(const std::string& id) const;
    std::vector<std::string> ids() const;
    Backend& get(const std::string& id) const;

    /// Requires a non-empty history ending in a user message. Transient
    /// failures are retried with exponential backoff; the returned
    /// Completion records the number of attempts.
    Completion complete(const std::string& id, const CallContext& ctx, const History& history,
                        const SamplingParams& sampling);

    /// Asks the agent how confident it is in `answer` on a copy of its
    /// history; the caller's history is never modified.
    Completion probe_confidence(const std::string& id, const CallContext& ctx, const History& history,
                                const std::string& answer, const SamplingParams& sampling);

    Clock& clock() const { return clock_; }

private:
    struct Entry {
        std::shared_ptr<Backend> backend;
        RetryPolicy retry;
        std::unique_ptr<RateLimiter> limiter;
    };
    Clock& clock_;
    std::map<std::string, Entry> entries_;
};

/// OpenAI-style chat completions over HTTP(S).
struct ChatHttpSettings {
    std::string endpoint;
    std::string model;
    /// Name of the environment variable holding the bearer token.
    std::string auth_env;
    std::map<std::string, std::string> headers;
    std::chrono::milliseconds timeout{120000};
};

class ChatHttpBackend final : public Backend {
public:
    explicit ChatHttpBackend(ChatHttpSettings settings);
    Completion complete(const CallContext& ctx, const History& history, const SamplingParams& sampling) override;
    std::string model() const override { return settings_.model; }

    static json request_body(const std::string& model, const History& history, const SamplingParams& sampling);

private:
    ChatHttpSettings settings_;
};

/// Memoizes completions by (backend id, model, history, sampling), optionally
/// persisted as JSON lines so judge calls can be replayed offline.
class CachingBackend final : public Backend {
public:
    CachingBackend(std::string id, std::shared_ptr<Backend> inner, std::string cache_path = {});
    Completion complete(const CallContext& ctx, const History& history, const SamplingParams& sampling) override;
    std::string model() const override { return inner_->model(); }
    std::size_t hits() const;

private:
    std::string key(const History& history, const SamplingParams& sampling) const;

    std::string id_;
    std::shared_ptr<Backend> inner_;
    std::string path_;
    mutable std::mutex mu_;
    std::map<std::string, Completion> cache_;
    std::size_t hits_ = 0;
};

/// Deterministic backend driven by a script policy. See make_scripted_backend
/// for the JSON parameters.
std::shared_ptr<Backend> make_scripted_backend(const json& params);

/// Renders `answer` in the format the task's prompt asks for, so the task's
/// extractor recovers it exactly.
std::string render_answer(TaskKind kind, const std::string& answer);

}  // namespace debate
