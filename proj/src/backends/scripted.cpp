#include <algorithm>
#include <map>
#include <mutex>

#include "debate/backends.hpp"
#include "debate/errors.hpp"
#include "debate/extract.hpp"
#include "debate/chess.hpp"

namespace debate {
namespace {

TokenCounts count_tokens(const History& history, const std::string& text) {
    TokenCounts t;
    for (const auto& m : history) t.prompt += count_words(m.content);
    t.completion = count_words(text);
    return t;
}

std::string correct_answer(const TaskInstance& task, const json& params) {
    if (params.contains("correct")) return params.at("correct").get<std::string>();
    return std::visit(
        [&](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ArithmeticTask>) return format_number(static_cast<double>(p.answer));
            else if constexpr (std::is_same_v<T, Gsm8kTask>) return format_number(p.answer);
            else if constexpr (std::is_same_v<T, MmluTask>) return std::string(1, p.answer);
            else if constexpr (std::is_same_v<T, ChessValidityTask>) return p.valid.front();
            else if constexpr (std::is_same_v<T, BiographyTask>) {
                std::string out;
                for (const auto& f : p.facts) out += "- " + f + "\n";
                return out;
            } else {
                auto it = task.metadata.find("best_move");
                if (it == task.metadata.end()) {
                    throw ConfigError("scripted oracle: chess_move task " + task.task_id +
                                      " has no metadata.best_move and no 'correct' parameter");
                }
                return it->second;
            }
        },
        task.payload);
}

/// Draws a wrong answer from the configured error distribution.
std::string wrong_answer(const TaskInstance& task, const std::string& correct, const json& error, SplitMix64& rng) {
    std::string type = error.value("type", "");
    if (type.empty()) {
        switch (answer_kind_for(task.kind())) {
            case AnswerKind::number: type = "offset"; break;
            case AnswerKind::letter: type = "letters"; break;
            case AnswerKind::square: type = "squares"; break;
            case AnswerKind::move: type = "legal_moves"; break;
            case AnswerKind::text: type = "fixed"; break;
        }
    }
    if (type == "offset") {
        const auto spread = error.value("spread", 10);
        if (spread < 1) throw ConfigError("scripted oracle: error.spread must be >= 1");
        const double base = std::stod(correct);
        const auto mag = rng.uniform_int(1, spread);
        const bool neg = rng.uniform() < 0.5;
        return format_number(base + static_cast<double>(neg ? -mag : mag));
    }
    if (type == "letters") {
        std::vector<std::string> pool;
        for (char c : std::string("ABCD")) {
            if (std::string(1, c) != correct) pool.emplace_back(1, c);
        }
        return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    }
    if (type == "squares") {
        std::vector<std::string> valid;
        if (auto* cv = std::get_if<ChessValidityTask>(&task.payload)) valid = cv->valid;
        else valid.push_back(correct);
        std::vector<std::string> pool;
        for (char f = 'a'; f <= 'h'; ++f) {
            for (char r = '1'; r <= '8'; ++r) {
                std::string sq{f, r};
                if (std::find(valid.begin(), valid.end(), sq) == valid.end()) pool.push_back(sq);
            }
        }
        return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    }
    if (type == "legal_moves") {
        const auto* cm = std::get_if<ChessMoveTask>(&task.payload);
        if (!cm) throw ConfigError("scripted oracle: error.type legal_moves needs a chess_move task");
        auto pos = chess::replay_san(cm->san_moves);
        std::vector<std::string> pool;
        for (const auto& m : pos.legal_moves()) {
            auto san = pos.to_san(m);
            while (!san.empty() && (san.back() == '+' || san.back() == '#')) san.pop_back();
            if (san != correct) pool.push_back(san);
        }
        if (pool.empty()) return correct;
        return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    }
    if (type == "fixed") return error.value("value", std::string("I do not know."));
    throw ConfigError("scripted oracle: unknown error.type '" + type + "'");
}

std::string compact_answer(AnswerKind kind, const std::string& v) {
    switch (kind) {
        case AnswerKind::number: return v;
        case AnswerKind::letter: return "(" + v + ")";
        case AnswerKind::square: return "(" + v + ")";
        case AnswerKind::move: return "14. " + v;
        case AnswerKind::text: return v;
    }
    return v;
}

std::optional<std::string> extract_value(TaskKind kind, const std::string& text) {
    auto a = extract_answer(kind, text);
    if (!a) return std::nullopt;
    return a->value;
}

/// Answers the other agents gave, read back out of the prompt context.
std::vector<std::string> peer_answers(const CallContext& ctx) {
    std::vector<std::string> out;
    const auto kind = ctx.task->kind();
    for (const auto& block : ctx.context) {
        if (ctx.summarized) {
            for (const auto& line : split_lines(block)) {
                if (auto v = extract_value(kind, line)) out.push_back(*v);
            }
        } else if (auto v = extract_value(kind, block)) {
            out.push_back(*v);
        }
    }
    return out;
}

std::optional<std::string> own_previous(const CallContext& ctx, const History& history) {
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (it->role == Role::assistant) return extract_value(ctx.task->kind(), it->content);
    }
    return std::nullopt;
}

/// Unique plurality, or nothing when the top count is shared.
std::optional<std::string> strict_plurality(const std::vector<std::string>& values) {
    std::map<std::string, int> counts;
    for (const auto& v : values) ++counts[v];
    std::optional<std::string> best;
    int top = 0;
    bool tied = false;
    for (const auto& [v, c] : counts) {
        if (c > top) {
            top = c;
            best = v;
            tied = false;
        } else if (c == top) {
            tied = true;
        }
    }
    if (tied) return std::nullopt;
    return best;
}

/// Plurality with ties broken by first occurrence.
std::optional<std::string> ordered_plurality(const std::vector<std::string>& values) {
    std::optional<std::string> best;
    int top = 0;
    for (const auto& v : values) {
        int c = static_cast<int>(std::count(values.begin(), values.end(), v));
        if (c > top) {
            top = c;
            best = v;
        }
    }
    return best;
}

std::uint64_t call_seed(std::uint64_t base, const CallContext& ctx, const SamplingParams& s) {
    return mix_seed({base, hash64(ctx.task ? ctx.task->task_id : ctx.debate_id),
                     static_cast<std::uint64_t>(ctx.agent_index), static_cast<std::uint64_t>(ctx.round),
                     static_cast<std::uint64_t>(ctx.phase), static_cast<std::uint64_t>(s.seed.value_or(0))});
}

class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(const json& params) : params_(params) {
        model_ = params.value("model", "scripted-" + params.value("policy", std::string("fixed_sequence")));
        max_context_chars_ = params.value("max_context_chars", std::size_t{0});
        fail_first_ = params.value("fail_first", 0);
        fail_kind_ = params.value("fail_kind", std::string("transport"));
        confidence_text_ = params.value("confidence", std::string("I am 100% confident."));
    }

    Completion complete(const CallContext& ctx, const History& history, const SamplingParams& sampling) final {
        if (max_context_chars_ > 0) {
            std::size_t chars = 0;
            for (const auto& m : history) chars += m.content.size();
            if (chars > max_context_chars_) {
                throw ContextOverflow("prompt of " + std::to_string(chars) + " characters exceeds the limit of " +
                                      std::to_string(max_context_chars_));
            }
        }
        if (fail_first_ > 0) maybe_fail(ctx);
        std::string text = respond(ctx, history, sampling);
        if (text.empty()) text = "(no response)";
        return {text, count_tokens(history, text), 1};
    }

    std::string model() const final { return model_; }

protected:
    virtual std::string respond(const CallContext& ctx, const History& history, const SamplingParams& sampling) = 0;

    std::string digest(const CallContext& ctx) const {
        const auto kind = ctx.task ? answer_kind_for(ctx.task->kind()) : AnswerKind::text;
        std::string out;
        for (const auto& block : ctx.context) {
            std::optional<std::string> v;
            if (ctx.task) v = extract_value(ctx.task->kind(), block);
            if (!out.empty()) out += "\n";
            out += v ? "One agent answered " + compact_answer(kind, *v) + "." : "One agent gave no clear answer.";
        }
        return out;
    }

    const json& params() const { return params_; }
    const std::string& confidence_text() const { return confidence_text_; }

private:
    void maybe_fail(const CallContext& ctx) {
        const std::string k = ctx.debate_id + "/" + std::to_string(ctx.agent_index) + "/" + std::to_string(ctx.round) +
                              "/" + std::string(to_string(ctx.phase));
        std::lock_guard lock(fail_mu_);
        int& n = failures_[k];
        if (n >= fail_first_) return;
        ++n;
        if (fail_kind_ == "rate_limited") throw RateLimited("scripted: rate limited");
        if (fail_kind_ == "auth") throw AuthError("scripted: unauthorized");
        if (fail_kind_ == "context_overflow") throw ContextOverflow("scripted: context overflow");
        throw TransportError("scripted: connection reset");
    }

    json params_;
    std::string model_;
    std::size_t max_context_chars_ = 0;
    int fail_first_ = 0;
    std::string fail_kind_;
    std::string confidence_text_;
    std::mutex fail_mu_;
    std::map<std::string, int> failures_;
};

class FixedSequenceBackend final : public ScriptedBackend {
public:
    explicit FixedSequenceBackend(const json& params) : ScriptedBackend(params) {
        if (params.contains("per_agent")) {
            per_agent_ = params.at("per_agent").get<std::vector<std::vector<std::string>>>();
        } else if (params.contains("responses")) {
            shared_ = params.at("responses").get<std::vector<std::string>>();
        } else {
            throw ConfigError("scripted fixed_sequence: needs 'responses' or 'per_agent'");
        }
        cycle_ = params.value("cycle", false);
    }

protected:
    std::string respond(const CallContext& ctx, const History&, const SamplingParams&) override {
        const std::vector<std::string>* seq = &shared_;
        if (!per_agent_.empty()) seq = &per_agent_[static_cast<std::size_t>(ctx.agent_index) % per_agent_.size()];
        if (seq->empty()) throw BackendError("scripted fixed_sequence: empty response list");
        std::size_t i;
        {
            std::lock_guard lock(mu_);
            i = cursor_[{ctx.debate_id, ctx.agent_index}]++;
        }
        if (i >= seq->size()) {
            if (!cycle_) {
                throw BackendError("scripted fixed_sequence exhausted for agent " + std::to_string(ctx.agent_index) +
                                   " after " + std::to_string(seq->size()) + " responses");
            }
            i %= seq->size();
        }
        return (*seq)[i];
    }

private:
    std::vector<std::string> shared_;
    std::vector<std::vector<std::string>> per_agent_;
    bool cycle_ = false;
    std::mutex mu_;
    std::map<std::pair<std::string, int>, std::size_t> cursor_;
};

class OracleBackend : public ScriptedBackend {
public:
    explicit OracleBackend(const json& params)
        : ScriptedBackend(params), seed_(params.value("seed", std::uint64_t{0})) {}

protected:
    std::string respond(const CallContext& ctx, const History& history, const SamplingParams& sampling) final {
        switch (ctx.phase) {
            case CallPhase::summary: return digest(ctx);
            case CallPhase::confidence: return confidence_text();
            case CallPhase::judge: return "uncertain";
            default: break;
        }
        if (!ctx.task) throw BackendError("scripted oracle: call has no task");
        SplitMix64 rng(call_seed(seed_, ctx, sampling));
        const std::string correct = correct_answer(*ctx.task, params());
        return render_answer(ctx.task->kind(), decide(ctx, history, correct, rng));
    }

    virtual std::string decide(const CallContext& ctx, const History& history, const std::string& correct,
                               SplitMix64& rng) = 0;

    std::string wrong(const CallContext& ctx, const std::string& correct, SplitMix64& rng) const {
        return wrong_answer(*ctx.task, correct, params().value("error", json::object()), rng);
    }

private:
    std::uint64_t seed_;
};

/// Each agent is independently right with probability `accuracy` at round 0.
/// In later rounds it adopts the strict plurality of the other agents' answers
/// with probability `persuadability`, otherwise keeps its own; an agent that
/// keeps its own answer switches to the correct one with probability `insight`.
class NoisyOracleBackend final : public OracleBackend {
public:
    explicit NoisyOracleBackend(const json& params) : OracleBackend(params) {
        accuracy_ = params.value("accuracy", 0.6);
        persuadability_ = params.value("persuadability", 0.7);
        if (params.contains("persuadability_short")) persuadability_short_ = params.at("persuadability_short").get<double>();
        insight_ = params.value("insight", 0.0);
        for (double p : {accuracy_, persuadability_, persuadability_short_.value_or(0.0), insight_}) {
            if (p < 0.0 || p > 1.0) throw ConfigError("scripted noisy_oracle: probabilities must lie in [0,1]");
        }
    }

protected:
    std::string decide(const CallContext& ctx, const History& history, const std::string& correct,
                       SplitMix64& rng) override {
        auto fresh = [&] { return rng.uniform() < accuracy_ ? correct : wrong(ctx, correct, rng); };
        if (ctx.phase == CallPhase::start) return fresh();
        auto own = own_previous(ctx, history);
        if (!own) return fresh();
        if (ctx.phase == CallPhase::debate) {
            const double p = ctx.style == PromptStyle::short_form && persuadability_short_ ? *persuadability_short_
                                                                                             : persuadability_;
            if (rng.uniform() < p) {
                auto plur = strict_plurality(peer_answers(ctx));
                return plur ? *plur : *own;
            }
        }
        if (insight_ > 0.0 && rng.uniform() < insight_) return correct;
        return *own;
    }

private:
    double accuracy_ = 0.6;
    double persuadability_ = 0.7;
    std::optional<double> persuadability_short_;
    double insight_ = 0.0;
};

/// Deterministic answers: `initial[i % n]` is "correct", "wrong" or a literal
/// answer; `update` is keep, adopt_plurality_others, copy_consensus or
/// revise_to_correct, optionally overridden per style by update_short and
/// update_long; `reflection` is keep or revise_to_correct.
class AnswerOracleBackend final : public OracleBackend {
public:
    explicit AnswerOracleBackend(const json& params) : OracleBackend(params) {
        initial_ = params.value("initial", std::vector<std::string>{"correct"});
        if (initial_.empty()) throw ConfigError("scripted answer_oracle: 'initial' must not be empty");
        update_ = params.value("update", std::string("keep"));
        update_short_ = params.value("update_short", update_);
        update_long_ = params.value("update_long", update_);
        reflection_ = params.value("reflection", std::string("keep"));
        for (const auto* u : {&update_, &update_short_, &update_long_, &reflection_}) {
            if (*u != "keep" && *u != "adopt_plurality_others" && *u != "copy_consensus" &&
                *u != "revise_to_correct") {
                throw ConfigError("scripted answer_oracle: unknown update rule '" + *u + "'");
            }
        }
    }

protected:
    std::string decide(const CallContext& ctx, const History& history, const std::string& correct,
                       SplitMix64& rng) override {
        auto initial = [&] {
            const auto& spec = initial_[static_cast<std::size_t>(ctx.agent_index) % initial_.size()];
            if (spec == "correct") return correct;
            if (spec == "wrong") return wrong(ctx, correct, rng);
            return spec;
        };
        if (ctx.phase == CallPhase::start) return initial();
        auto own = own_previous(ctx, history);
        if (!own) return initial();
        const std::string& rule = ctx.phase == CallPhase::reflection ? reflection_
                                  : ctx.style == PromptStyle::short_form ? update_short_
                                                                         : update_long_;
        if (rule == "revise_to_correct") return correct;
        if (rule == "adopt_plurality_others") {
            auto plur = strict_plurality(peer_answers(ctx));
            return plur ? *plur : *own;
        }
        if (rule == "copy_consensus") {
            auto all = peer_answers(ctx);
            const auto at = std::min<std::size_t>(static_cast<std::size_t>(ctx.agent_index), all.size());
            all.insert(all.begin() + static_cast<std::ptrdiff_t>(at), *own);
            return ordered_plurality(all).value_or(*own);
        }
        return *own;
    }

private:
    std::vector<std::string> initial_;
    std::string update_, update_short_, update_long_, reflection_;
};

/// Summarizer that states each embedded response's extracted answer.
class AnswerDigestBackend final : public ScriptedBackend {
public:
    using ScriptedBackend::ScriptedBackend;

protected:
    std::string respond(const CallContext& ctx, const History&, const SamplingParams&) override {
        if (ctx.phase == CallPhase::confidence) return confidence_text();
        return digest(ctx);
    }
};

}  // namespace

std::string render_answer(TaskKind kind, const std::string& answer) {
    switch (kind) {
        case TaskKind::arithmetic: return "Applying multiplication before addition and subtraction, the answer is " + answer + ".";
        case TaskKind::gsm8k: return "Working through the problem step by step gives \\boxed{" + answer + "}.";
        case TaskKind::mmlu: return "After weighing each option, the answer is (" + answer + ").";
        case TaskKind::chess_validity: return "The piece can legally reach (" + answer + ").\n" + answer;
        case TaskKind::chess_move: return "I suggest 14. " + answer;
        case TaskKind::biography: return answer;
    }
    return answer;
}

std::shared_ptr<Backend> make_scripted_backend(const json& params) {
    const std::string policy = params.value("policy", std::string("fixed_sequence"));
    if (policy == "fixed_sequence") return std::make_shared<FixedSequenceBackend>(params);
    if (policy == "noisy_oracle") return std::make_shared<NoisyOracleBackend>(params);
    if (policy == "answer_oracle") return std::make_shared<AnswerOracleBackend>(params);
    if (policy == "answer_digest") return std::make_shared<AnswerDigestBackend>(params);
    throw ConfigError("scripted backend: unknown policy '" + policy + "'");
}

}  // namespace debate
