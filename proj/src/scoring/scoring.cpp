#include "debate/scoring.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "debate/chess.hpp"
#include "debate/errors.hpp"
#include "debate/prompts.hpp"

namespace debate {

bool answers_match(const ExtractedAnswer& a, const ExtractedAnswer& b) {
    if (a.kind == AnswerKind::number && b.kind == AnswerKind::number) {
        auto x = a.number();
        auto y = b.number();
        return x && y && std::fabs(*x - *y) <= 1e-6;
    }
    return a.same_value(b);
}

bool score_exact(const ExtractedAnswer& answer, const TaskInstance& task) {
    return std::visit(
        [&](const auto& p) -> bool {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ArithmeticTask>) {
                auto v = answer.number();
                return v && std::fabs(*v - static_cast<double>(p.answer)) <= 1e-6;
            } else if constexpr (std::is_same_v<T, Gsm8kTask>) {
                auto v = answer.number();
                return v && std::fabs(*v - p.answer) <= 1e-6;
            } else if constexpr (std::is_same_v<T, MmluTask>) {
                return answer.kind == AnswerKind::letter && answer.value == std::string(1, p.answer);
            } else if constexpr (std::is_same_v<T, ChessValidityTask>) {
                return answer.kind == AnswerKind::square &&
                       std::find(p.valid.begin(), p.valid.end(), answer.value) != p.valid.end();
            } else {
                throw Error("task " + task.task_id + " (" + std::string(to_string(task.kind())) +
                            ") has no exact ground truth");
            }
        },
        task.payload);
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::yes: return "yes";
        case Verdict::no: return "no";
        case Verdict::uncertain: return "uncertain";
    }
    return "uncertain";
}

Verdict parse_verdict(std::string_view reply) {
    std::string t = trim(reply);
    std::size_t begin = 0;
    while (begin < t.size() && std::string_view("*_`\"'([").find(t[begin]) != std::string_view::npos) ++begin;
    std::size_t end = begin;
    while (end < t.size() && std::isalpha(static_cast<unsigned char>(t[end]))) ++end;
    const std::string word = to_lower(t.substr(begin, end - begin));
    if (word == "yes") return Verdict::yes;
    if (word == "no") return Verdict::no;
    return Verdict::uncertain;
}

Verdict judge_biography(const std::string& person, const std::string& biography, const std::string& fact,
                        BackendRegistry& backends, const std::string& backend_id, const std::string& key) {
    CallContext ctx;
    ctx.debate_id = key;
    ctx.phase = CallPhase::judge;
    SamplingParams s;
    s.temperature = 0.0;
    s.max_tokens = 16;
    History h{build_judge_prompt(person, biography, fact)};
    return parse_verdict(backends.complete(backend_id, ctx, h, s).text);
}

std::optional<double> biography_accuracy(const std::vector<Verdict>& verdicts) {
    int yes = 0, no = 0;
    for (auto v : verdicts) {
        if (v == Verdict::yes) ++yes;
        else if (v == Verdict::no) ++no;
    }
    if (yes + no == 0) return std::nullopt;
    return static_cast<double>(yes) / static_cast<double>(yes + no);
}

BiographyScore score_biography(const std::string& person, const std::string& biography,
                               const std::vector<std::string>& facts, BackendRegistry& backends,
                               const std::string& backend_id, const std::string& key) {
    BiographyScore s;
    for (const auto& f : facts) s.verdicts.push_back(judge_biography(person, biography, f, backends, backend_id, key));
    s.accuracy = biography_accuracy(s.verdicts);
    return s;
}

std::string_view to_string(IllegalMovePolicy p) {
    switch (p) {
        case IllegalMovePolicy::exclude: return "exclude";
        case IllegalMovePolicy::before_minus_penalty: return "before_minus_penalty";
        case IllegalMovePolicy::worst_legal: return "worst_legal";
    }
    return "exclude";
}

IllegalMovePolicy parse_illegal_move_policy(std::string_view s) {
    if (s == "exclude") return IllegalMovePolicy::exclude;
    if (s == "before_minus_penalty") return IllegalMovePolicy::before_minus_penalty;
    if (s == "worst_legal") return IllegalMovePolicy::worst_legal;
    throw ConfigError("scoring.illegal_move_policy must be exclude, before_minus_penalty or worst_legal");
}

MoveScore score_move_pawn_delta(const std::vector<std::string>& prefix_san, std::string_view move,
                                chess::EnginePool& engine, IllegalMovePolicy policy, double penalty) {
    std::vector<std::string> prefix_uci;
    chess::replay_san(prefix_san, &prefix_uci);
    auto res = chess::check_move_legality(prefix_san, move);
    MoveScore out;
    out.legal = res.legal;
    if (res.legal) {
        out.uci = res.uci;
        auto line = prefix_uci;
        line.push_back(res.uci);
        out.pawns = engine.evaluate(line).white_pawns;
        return out;
    }
    switch (policy) {
        case IllegalMovePolicy::exclude: break;
        case IllegalMovePolicy::before_minus_penalty:
            out.pawns = engine.evaluate(prefix_uci).white_pawns - penalty;
            break;
        case IllegalMovePolicy::worst_legal: {
            auto pos = chess::replay_san(prefix_san);
            double worst = std::numeric_limits<double>::infinity();
            for (const auto& m : pos.legal_moves()) {
                auto line = prefix_uci;
                line.push_back(chess::to_uci(m));
                worst = std::min(worst, engine.evaluate(line).white_pawns);
            }
            if (std::isfinite(worst)) out.pawns = worst;
            break;
        }
    }
    return out;
}

std::string metric_for(TaskKind kind) {
    switch (kind) {
        case TaskKind::chess_move: return "pawn_score";
        case TaskKind::biography: return "fact_accuracy";
        default: return "accuracy";
    }
}

Aggregate aggregate_scores(const std::vector<InstanceScore>& scores, const std::string& metric) {
    Aggregate a;
    a.metric = metric;
    std::vector<double> xs;
    for (const auto& s : scores) {
        if (s.status == "failed") {
            ++a.failed;
            continue;
        }
        if (metric == "accuracy") {
            if (!s.correct) {
                ++a.excluded;
                continue;
            }
            xs.push_back(*s.correct ? 1.0 : 0.0);
        } else {
            if (!s.value) {
                ++a.excluded;
                continue;
            }
            xs.push_back(*s.value);
        }
    }
    a.n = static_cast<int>(xs.size());
    if (xs.empty()) return a;
    double sum = 0.0;
    for (double x : xs) sum += x;
    a.mean = sum / static_cast<double>(xs.size());
    if (metric == "accuracy") {
        a.se = std::sqrt(a.mean * (1.0 - a.mean) / static_cast<double>(a.n));
    } else if (a.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.se = std::sqrt(ss / static_cast<double>(a.n - 1)) / std::sqrt(static_cast<double>(a.n));
    }
    return a;
}

InstanceScore score_transcript(const Transcript& t, ScoringContext& ctx) {
    InstanceScore s;
    s.task_id = t.task.task_id;
    s.debate_id = t.debate_id;
    s.method = t.method;
    if (t.status == DebateStatus::failed) {
        s.status = "failed";
        return s;
    }
    if (t.final_answer) s.answer = t.final_answer->value;
    const TaskKind kind = t.task.kind();
    if (kind == TaskKind::chess_move) {
        if (!ctx.engine) {
            s.status = "unscored";
            return s;
        }
        const auto& prefix = std::get<ChessMoveTask>(t.task.payload).san_moves;
        auto ms = score_move_pawn_delta(prefix, t.final_answer ? t.final_answer->value : std::string(), *ctx.engine,
                                        ctx.illegal_move_policy, ctx.illegal_move_penalty);
        s.value = ms.pawns;
        if (!t.final_answer) s.status = "unparseable";
        else if (!ms.legal) s.status = "illegal";
        return s;
    }
    if (kind == TaskKind::biography) {
        if (!ctx.judges || ctx.judge_backend_id.empty()) {
            s.status = "unscored";
            return s;
        }
        if (!t.final_answer) {
            s.status = "unparseable";
            return s;
        }
        const auto& bio = std::get<BiographyTask>(t.task.payload);
        auto score = score_biography(bio.person, t.final_answer->value, bio.facts, *ctx.judges, ctx.judge_backend_id,
                                     "judge/" + t.debate_id);
        s.value = score.accuracy;
        return s;
    }
    if (!t.final_answer) {
        s.status = "unparseable";
        s.correct = false;
        return s;
    }
    s.correct = score_exact(*t.final_answer, t.task);
    return s;
}

EvalResult score_transcripts(const std::vector<Transcript>& transcripts, ScoringContext& ctx) {
    EvalResult r;
    std::string metric = "accuracy";
    if (!transcripts.empty()) metric = metric_for(transcripts.front().task.kind());
    for (const auto& t : transcripts) r.instances.push_back(score_transcript(t, ctx));
    r.aggregate = aggregate_scores(r.instances, metric);
    if (ctx.engine) {
        r.metadata["engine"] = ctx.engine->engine_name();
        r.metadata["engine_depth"] = ctx.engine->depth();
        r.metadata["illegal_move_policy"] = to_string(ctx.illegal_move_policy);
    }
    if (ctx.judges && !ctx.judge_backend_id.empty() && ctx.judges->contains(ctx.judge_backend_id)) {
        r.metadata["judge"] = ctx.judge_backend_id;
        r.metadata["judge_model"] = ctx.judges->get(ctx.judge_backend_id).model();
    }
    return r;
}

void to_json(json& j, const InstanceScore& s) {
    j = json{{"task_id", s.task_id}, {"debate_id", s.debate_id}, {"method", s.method}, {"status", s.status}};
    j["answer"] = s.answer ? json(*s.answer) : json(nullptr);
    j["correct"] = s.correct ? json(*s.correct) : json(nullptr);
    j["value"] = s.value ? json(*s.value) : json(nullptr);
}

void from_json(const json& j, InstanceScore& s) {
    s = InstanceScore{};
    s.task_id = j.at("task_id").get<std::string>();
    s.debate_id = j.value("debate_id", std::string());
    s.method = j.value("method", std::string());
    s.status = j.value("status", std::string("ok"));
    if (j.contains("answer") && !j["answer"].is_null()) s.answer = j["answer"].get<std::string>();
    if (j.contains("correct") && !j["correct"].is_null()) s.correct = j["correct"].get<bool>();
    if (j.contains("value") && !j["value"].is_null()) s.value = j["value"].get<double>();
}

void to_json(json& j, const Aggregate& a) {
    j = json{{"metric", a.metric}, {"mean", a.mean}, {"se", a.se},
             {"n", a.n},           {"failed", a.failed}, {"excluded", a.excluded}};
}

void from_json(const json& j, Aggregate& a) {
    a.metric = j.at("metric").get<std::string>();
    a.mean = j.at("mean").get<double>();
    a.se = j.at("se").get<double>();
    a.n = j.at("n").get<int>();
    a.failed = j.value("failed", 0);
    a.excluded = j.value("excluded", 0);
}

void to_json(json& j, const EvalResult& r) {
    j = json{{"aggregate", r.aggregate}, {"instances", r.instances}, {"metadata", r.metadata}};
}

void from_json(const json& j, EvalResult& r) {
    r.aggregate = j.at("aggregate").get<Aggregate>();
    r.instances = j.at("instances").get<std::vector<InstanceScore>>();
    r.metadata = j.value("metadata", json::object());
}

}  // namespace debate
