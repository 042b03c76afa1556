#include "debate/debate.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <future>
#include <map>
#include <mutex>

#include "debate/errors.hpp"
#include "debate/prompts.hpp"

namespace debate {
namespace {

std::string_view to_string(FinalRule r) { return r == FinalRule::plurality ? "plurality" : "first_agent"; }

FinalRule parse_final_rule(const std::string& s) {
    if (s == "plurality") return FinalRule::plurality;
    if (s == "first_agent") return FinalRule::first_agent;
    throw ConfigError("debate.final_rule must be plurality or first_agent, got '" + s + "'");
}

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

/// Initial messages of an agent's conversation: optional system message plus
/// the starting prompt.
History initial_part(const History& h) {
    History out;
    for (const auto& m : h) {
        out.push_back(m);
        if (m.role == Role::user) break;
    }
    return out;
}

History trimmed(const History& full, const ChatMessage& next) {
    History h = initial_part(full);
    for (auto it = full.rbegin(); it != full.rend(); ++it) {
        if (it->role == Role::assistant) {
            if (h.size() < full.size()) h.push_back(*it);
            break;
        }
    }
    h.push_back(next);
    return h;
}

/// Runs fn(i) for every agent, concurrently when asked, and rethrows the
/// first failure by agent index once every call has finished.
template <typename T, typename Fn>
std::vector<T> for_each_agent(int n, bool concurrent, Fn fn) {
    std::vector<T> out(static_cast<std::size_t>(n));
    if (!concurrent || n == 1) {
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    std::vector<std::future<T>> futs;
    futs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) futs.push_back(std::async(std::launch::async, fn, i));
    std::exception_ptr first;
    for (int i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = futs[static_cast<std::size_t>(i)].get();
        } catch (...) {
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
    return out;
}

struct AgentResult {
    AgentTurn turn;
    ChatMessage sent_user;
    std::vector<TranscriptEvent> events;
};

class DebateRun {
public:
    DebateRun(const TaskInstance& task, const DebateConfig& cfg, BackendRegistry& backends, std::string method)
        : task_(task), cfg_(cfg), backends_(backends), clock_(backends.clock()) {
        t_.task = task;
        t_.config = cfg;
        t_.method = std::move(method);
        t_.debate_id = make_debate_id(task.task_id, t_.method, cfg);
        t_.created_at = clock_.timestamp();
        t_.catalog_version = PromptCatalog::builtin().version();
        summarizer_ = cfg.summarizer_backend_id.empty() ? cfg.backend_ids.front() : cfg.summarizer_backend_id;
    }

    Transcript run(int rounds, bool reflection) {
        const int n = cfg_.num_agents;
        histories_.resize(static_cast<std::size_t>(n));
        try {
            for (int i = 0; i < n; ++i) {
                std::optional<std::string> persona;
                if (!cfg_.personas.empty()) persona = cfg_.personas[static_cast<std::size_t>(i)];
                histories_[static_cast<std::size_t>(i)] = build_initial_prompt(task_, persona, cfg_.chain_of_thought);
            }
            auto first = for_each_agent<AgentResult>(n, cfg_.concurrent, [&](int i) {
                return call(i, 0, CallPhase::start, histories_[static_cast<std::size_t>(i)], {}, false);
            });
            seal(0, std::move(first));
            for (int r = 1; r <= rounds; ++r) {
                auto results = reflection ? reflect_round(r) : debate_round(r);
                seal(r, std::move(results));
            }
            t_.final_answer = select_final_answer(t_.rounds.back(), cfg_.final_rule);
            if (cfg_.probe_confidence) probe();
        } catch (const BackendError& e) {
            t_.status = DebateStatus::failed;
            t_.error = e.what();
            t_.final_answer.reset();
            spdlog::warn("debate {} on {} failed: {}", t_.debate_id, task_.task_id, e.what());
        }
        std::sort(t_.summaries.begin(), t_.summaries.end(), [](const auto& a, const auto& b) {
            return std::tie(a.round, a.for_agent) < std::tie(b.round, b.for_agent);
        });
        return std::move(t_);
    }

private:
    AgentResult call(int agent, int round, CallPhase phase, const History& prompt, std::vector<std::string> context,
                     bool summarized) {
        CallContext ctx;
        ctx.debate_id = t_.debate_id;
        ctx.task = &task_;
        ctx.agent_index = agent;
        ctx.round = round;
        ctx.phase = phase;
        ctx.style = cfg_.prompt_style;
        ctx.context = std::move(context);
        ctx.summarized = summarized;
        const auto start = clock_.now();
        Completion c = backends_.complete(cfg_.backend_ids[static_cast<std::size_t>(agent)], ctx, prompt, cfg_.sampling);
        AgentResult res;
        res.turn.agent_index = agent;
        res.turn.prompt_sent = prompt;
        res.turn.response = std::move(c.text);
        res.turn.answer = extract_answer(task_.kind(), res.turn.response);
        res.turn.latency_ms = elapsed_ms(start, clock_.now());
        res.turn.tokens = c.tokens;
        res.turn.attempts = c.attempts;
        res.sent_user = prompt.back();
        return res;
    }

    std::vector<OtherResponse> others_of(int agent, int round) const {
        std::vector<OtherResponse> out;
        for (const auto& turn : t_.rounds[static_cast<std::size_t>(round - 1)]) {
            if (turn.agent_index != agent) out.push_back({turn.agent_index, turn.response});
        }
        return out;
    }

    /// Summary of every agent but `agent` from the previous round, generated
    /// once per (round, agent).
    std::string summary_for(int agent, int round) {
        {
            std::lock_guard lock(summary_mu_);
            if (auto it = summary_cache_.find({round, agent}); it != summary_cache_.end()) return it->second;
        }
        auto others = others_of(agent, round);
        CallContext ctx;
        ctx.debate_id = t_.debate_id;
        ctx.task = &task_;
        ctx.agent_index = agent;
        ctx.round = round;
        ctx.phase = CallPhase::summary;
        ctx.style = cfg_.prompt_style;
        for (const auto& o : others) ctx.context.push_back(o.text);
        std::string text = summarize_responses(others, summarizer_, backends_, ctx, cfg_.sampling);
        std::lock_guard lock(summary_mu_);
        auto [it, inserted] = summary_cache_.emplace(std::make_pair(round, agent), text);
        if (inserted) {
            SummaryRecord rec{round, agent, {}, text};
            for (const auto& o : others) rec.sources.push_back(o.agent_index);
            t_.summaries.push_back(std::move(rec));
        }
        return it->second;
    }

    std::vector<AgentResult> debate_round(int r) {
        const int n = cfg_.num_agents;
        return for_each_agent<AgentResult>(n, cfg_.concurrent, [&, r](int i) {
            auto& hist = histories_[static_cast<std::size_t>(i)];
            auto others = others_of(i, r);
            std::optional<std::string> summary;
            if (cfg_.summarize_others) summary = summary_for(i, r);
            auto context = [&](const std::optional<std::string>& s) {
                std::vector<std::string> c;
                if (s) c.push_back(*s);
                else for (const auto& o : others) c.push_back(o.text);
                return c;
            };
            ChatMessage msg = build_debate_prompt(task_, others, cfg_.prompt_style, summary);
            History full = hist;
            full.push_back(msg);
            std::vector<TranscriptEvent> events;
            try {
                return call(i, r, CallPhase::debate, full, context(summary), summary.has_value());
            } catch (const ContextOverflow& e) {
                events.push_back({r, i, "overflow_trim", e.what()});
            }
            try {
                auto res = call(i, r, CallPhase::debate, trimmed(hist, msg), context(summary), summary.has_value());
                res.events = std::move(events);
                return res;
            } catch (const ContextOverflow& e) {
                if (summary) throw;
                events.push_back({r, i, "overflow_summarize", e.what()});
            }
            summary = summary_for(i, r);
            msg = build_debate_prompt(task_, others, cfg_.prompt_style, summary);
            auto res = call(i, r, CallPhase::debate, trimmed(hist, msg), context(summary), true);
            res.events = std::move(events);
            return res;
        });
    }

    std::vector<AgentResult> reflect_round(int r) {
        const ChatMessage msg = build_reflection_prompt();
        History full = histories_.front();
        full.push_back(msg);
        std::vector<AgentResult> out;
        out.push_back(call(0, r, CallPhase::reflection, full, {}, false));
        return out;
    }

    void seal(int r, std::vector<AgentResult> results) {
        Round round;
        for (auto& res : results) {
            auto& hist = histories_[static_cast<std::size_t>(res.turn.agent_index)];
            if (r > 0) hist.push_back(res.sent_user);
            hist.push_back({Role::assistant, res.turn.response});
            for (auto& e : res.events) t_.events.push_back(std::move(e));
            round.push_back(std::move(res.turn));
        }
        t_.rounds.push_back(std::move(round));
    }

    void probe() {
        auto& last = t_.rounds.back();
        const int r = static_cast<int>(t_.rounds.size()) - 1;
        auto texts = for_each_agent<std::string>(cfg_.num_agents, cfg_.concurrent, [&](int i) {
            const auto& turn = last[static_cast<std::size_t>(i)];
            CallContext ctx;
            ctx.debate_id = t_.debate_id;
            ctx.task = &task_;
            ctx.agent_index = i;
            ctx.round = r;
            const std::string answer = turn.answer ? turn.answer->value : std::string("(none)");
            return backends_
                .probe_confidence(cfg_.backend_ids[static_cast<std::size_t>(i)], ctx,
                                  histories_[static_cast<std::size_t>(i)], answer, cfg_.sampling)
                .text;
        });
        for (std::size_t i = 0; i < texts.size(); ++i) last[i].confidence = std::move(texts[i]);
    }

    const TaskInstance& task_;
    const DebateConfig& cfg_;
    BackendRegistry& backends_;
    Clock& clock_;
    std::string summarizer_;
    Transcript t_;
    std::vector<History> histories_;
    std::mutex summary_mu_;
    std::map<std::pair<int, int>, std::string> summary_cache_;
};

}  // namespace

void DebateConfig::validate(const BackendRegistry* registry) const {
    if (num_agents < 1) throw ConfigError("debate.num_agents must be >= 1");
    if (num_rounds < 0) throw ConfigError("debate.num_rounds must be >= 0");
    if (num_rounds >= 1 && num_agents < 2) throw ConfigError("debate.num_agents must be >= 2 when num_rounds >= 1");
    if (!personas.empty() && static_cast<int>(personas.size()) != num_agents) {
        throw ConfigError("debate.personas must have exactly num_agents (" + std::to_string(num_agents) + ") entries");
    }
    if (static_cast<int>(backend_ids.size()) != num_agents) {
        throw ConfigError("debate.backend_ids must have exactly num_agents (" + std::to_string(num_agents) +
                          ") entries");
    }
    if (sampling.temperature < 0.0) throw ConfigError("debate.sampling.temperature must be >= 0");
    if (sampling.max_tokens < 1) throw ConfigError("debate.sampling.max_tokens must be >= 1");
    if (registry) {
        for (const auto& id : backend_ids) {
            if (!registry->contains(id)) throw ConfigError("debate.backend_ids: unknown backend '" + id + "'");
        }
        if (!summarizer_backend_id.empty() && !registry->contains(summarizer_backend_id)) {
            throw ConfigError("debate.summarizer_backend_id: unknown backend '" + summarizer_backend_id + "'");
        }
    }
}

DebateConfig DebateConfig::with_agents(int n) const {
    DebateConfig c = *this;
    c.num_agents = n;
    if (!backend_ids.empty()) {
        c.backend_ids.resize(static_cast<std::size_t>(std::max(n, 0)), backend_ids.back());
    }
    if (!personas.empty()) {
        c.personas.clear();
        for (int i = 0; i < n; ++i) c.personas.push_back(personas[static_cast<std::size_t>(i) % personas.size()]);
    }
    return c;
}

void to_json(json& j, const DebateConfig& c) {
    j = json{{"num_agents", c.num_agents},
             {"num_rounds", c.num_rounds},
             {"prompt_style", to_string(c.prompt_style)},
             {"summarize_others", c.summarize_others},
             {"personas", c.personas},
             {"backend_ids", c.backend_ids},
             {"sampling", c.sampling},
             {"summarizer_backend_id", c.summarizer_backend_id},
             {"final_rule", to_string(c.final_rule)},
             {"probe_confidence", c.probe_confidence},
             {"chain_of_thought", c.chain_of_thought}};
}

void from_json(const json& j, DebateConfig& c) {
    c = DebateConfig{};
    try {
        c.num_agents = j.value("num_agents", c.num_agents);
        c.num_rounds = j.value("num_rounds", c.num_rounds);
        if (j.contains("prompt_style")) c.prompt_style = parse_prompt_style(j.at("prompt_style").get<std::string>());
        c.summarize_others = j.value("summarize_others", false);
        c.personas = j.value("personas", std::vector<std::string>{});
        if (j.contains("backend_ids")) c.backend_ids = j.at("backend_ids").get<std::vector<std::string>>();
        if (j.contains("sampling")) c.sampling = j.at("sampling").get<SamplingParams>();
        c.summarizer_backend_id = j.value("summarizer_backend_id", std::string());
        if (j.contains("final_rule")) c.final_rule = parse_final_rule(j.at("final_rule").get<std::string>());
        c.probe_confidence = j.value("probe_confidence", false);
        c.chain_of_thought = j.value("chain_of_thought", false);
        c.concurrent = j.value("concurrent", true);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("debate: ") + e.what());
    }
}

namespace {

json turn_json(const AgentTurn& t) {
    json j{{"agent", t.agent_index},   {"prompt", t.prompt_sent}, {"response", t.response},
           {"latency_ms", t.latency_ms}, {"tokens", t.tokens},      {"attempts", t.attempts}};
    j["answer"] = t.answer ? json(*t.answer) : json(nullptr);
    if (t.confidence) j["confidence"] = *t.confidence;
    return j;
}

AgentTurn turn_from(const json& j) {
    AgentTurn t;
    t.agent_index = j.at("agent").get<int>();
    t.prompt_sent = j.at("prompt").get<History>();
    t.response = j.at("response").get<std::string>();
    if (j.contains("answer") && !j.at("answer").is_null()) t.answer = j.at("answer").get<ExtractedAnswer>();
    t.latency_ms = j.value("latency_ms", 0.0);
    if (j.contains("tokens")) t.tokens = j.at("tokens").get<TokenCounts>();
    t.attempts = j.value("attempts", 1);
    if (j.contains("confidence")) t.confidence = j.at("confidence").get<std::string>();
    return t;
}

}  // namespace

void to_json(json& j, const Transcript& t) {
    json rounds = json::array();
    for (const auto& r : t.rounds) {
        json turns = json::array();
        for (const auto& turn : r) turns.push_back(turn_json(turn));
        rounds.push_back(std::move(turns));
    }
    json summaries = json::array();
    for (const auto& s : t.summaries) {
        summaries.push_back({{"round", s.round}, {"for_agent", s.for_agent}, {"sources", s.sources}, {"text", s.text}});
    }
    json events = json::array();
    for (const auto& e : t.events) {
        events.push_back({{"round", e.round}, {"agent", e.agent}, {"kind", e.kind}, {"detail", e.detail}});
    }
    j = json{{"schema", "debate.transcript"},
             {"schema_version", Transcript::kSchemaVersion},
             {"debate_id", t.debate_id},
             {"task_id", t.task.task_id},
             {"task", t.task},
             {"method", t.method},
             {"status", t.status == DebateStatus::ok ? "ok" : "failed"},
             {"error", t.error},
             {"config", t.config},
             {"catalog_version", t.catalog_version},
             {"rounds", rounds},
             {"summaries", summaries},
             {"events", events},
             {"final_answer", t.final_answer ? json(*t.final_answer) : json(nullptr)},
             {"created_at", t.created_at}};
}

void from_json(const json& j, Transcript& t) {
    if (j.value("schema", std::string()) != "debate.transcript") throw ParseError("not a debate transcript record");
    if (j.value("schema_version", 0) > Transcript::kSchemaVersion) {
        throw ParseError("transcript schema_version " + std::to_string(j.value("schema_version", 0)) +
                         " is newer than supported");
    }
    t = Transcript{};
    t.debate_id = j.at("debate_id").get<std::string>();
    t.task = j.at("task").get<TaskInstance>();
    t.method = j.value("method", std::string("debate"));
    t.status = j.value("status", std::string("ok")) == "ok" ? DebateStatus::ok : DebateStatus::failed;
    t.error = j.value("error", std::string());
    t.config = j.at("config").get<DebateConfig>();
    t.catalog_version = j.value("catalog_version", std::string());
    for (const auto& r : j.at("rounds")) {
        Round round;
        for (const auto& turn : r) round.push_back(turn_from(turn));
        t.rounds.push_back(std::move(round));
    }
    for (const auto& s : j.value("summaries", json::array())) {
        t.summaries.push_back({s.at("round").get<int>(), s.at("for_agent").get<int>(),
                               s.at("sources").get<std::vector<int>>(), s.at("text").get<std::string>()});
    }
    for (const auto& e : j.value("events", json::array())) {
        t.events.push_back({e.at("round").get<int>(), e.at("agent").get<int>(), e.at("kind").get<std::string>(),
                            e.value("detail", std::string())});
    }
    if (j.contains("final_answer") && !j.at("final_answer").is_null()) {
        t.final_answer = j.at("final_answer").get<ExtractedAnswer>();
    }
    t.created_at = j.value("created_at", std::string());
}

std::string make_debate_id(const std::string& task_id, const std::string& method, const DebateConfig& config) {
    json key{{"task_id", task_id}, {"method", method}, {"config", config}};
    return short_hash(key.dump());
}

std::optional<ExtractedAnswer> select_final_answer(const Round& round, FinalRule rule) {
    if (round.empty()) return std::nullopt;
    if (rule == FinalRule::first_agent) return round.front().answer;
    std::vector<std::optional<ExtractedAnswer>> answers;
    for (const auto& t : round) answers.push_back(t.answer);
    return majority_vote(answers);
}

std::string summarize_responses(const std::vector<OtherResponse>& responses, const std::string& backend_id,
                                BackendRegistry& backends, const CallContext& ctx, const SamplingParams& sampling) {
    History h{build_summary_request(responses)};
    CallContext c = ctx;
    c.phase = CallPhase::summary;
    c.summarized = false;
    if (c.context.empty()) {
        for (const auto& r : responses) c.context.push_back(r.text);
    }
    return backends.complete(backend_id, c, h, sampling).text;
}

Transcript run_debate(const TaskInstance& task, const DebateConfig& config, BackendRegistry& backends,
                      const std::string& method) {
    config.validate(&backends);
    return DebateRun(task, config, backends, method).run(config.num_rounds, false);
}

Transcript run_reflection(const TaskInstance& task, const DebateConfig& config, BackendRegistry& backends,
                          int reflection_rounds) {
    if (reflection_rounds < 0) throw ConfigError("reflection_rounds must be >= 0");
    DebateConfig cfg = config.with_agents(1);
    cfg.num_rounds = 0;
    cfg.summarize_others = false;
    cfg.validate(&backends);
    cfg.num_rounds = reflection_rounds;
    return DebateRun(task, cfg, backends, "reflection").run(reflection_rounds, true);
}

}  // namespace debate
