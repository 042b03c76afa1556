#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "debate/backends.hpp"
#include "debate/debate.hpp"
#include "debate/extract.hpp"
#include "debate/uci_engine.hpp"

namespace debate {

/// Numbers equal within 1e-6, anything else by normalized value.
bool answers_match(const ExtractedAnswer& a, const ExtractedAnswer& b);

/// Correctness against the task's ground truth; chess validity accepts any
/// valid destination. Throws Error for kinds without exact ground truth.
bool score_exact(const ExtractedAnswer& answer, const TaskInstance& task);

enum class Verdict { yes, no, uncertain };

std::string_view to_string(Verdict v);
/// First word of the reply, case-insensitive; anything else is uncertain.
Verdict parse_verdict(std::string_view reply);

Verdict judge_biography(const std::string& person, const std::string& biography, const std::string& fact,
                        BackendRegistry& backends, const std::string& backend_id, const std::string& key);

/// yes / (yes + no); absent when every verdict is uncertain.
std::optional<double> biography_accuracy(const std::vector<Verdict>& verdicts);

struct BiographyScore {
    std::optional<double> accuracy;
    std::vector<Verdict> verdicts;
};

BiographyScore score_biography(const std::string& person, const std::string& biography,
                               const std::vector<std::string>& facts, BackendRegistry& backends,
                               const std::string& backend_id, const std::string& key);

enum class IllegalMovePolicy { exclude, before_minus_penalty, worst_legal };

std::string_view to_string(IllegalMovePolicy p);
IllegalMovePolicy parse_illegal_move_policy(std::string_view s);

struct MoveScore {
    bool legal = false;
    /// White's evaluation in pawns after the move, or the policy's substitute
    /// for an illegal move; absent when the policy excludes it.
    std::optional<double> pawns;
    std::string uci;
};

MoveScore score_move_pawn_delta(const std::vector<std::string>& prefix_san, std::string_view move,
                                chess::EnginePool& engine, IllegalMovePolicy policy = IllegalMovePolicy::exclude,
                                double penalty = 0.0);

struct InstanceScore {
    std::string task_id;
    std::string debate_id;
    std::string method;
    /// ok, failed, unparseable, illegal or unscored.
    std::string status = "ok";
    std::optional<std::string> answer;
    std::optional<bool> correct;
    std::optional<double> value;
};

struct Aggregate {
    /// accuracy, pawn_score or fact_accuracy.
    std::string metric;
    double mean = 0.0;
    double se = 0.0;
    int n = 0;
    int failed = 0;
    int excluded = 0;
};

struct EvalResult {
    std::vector<InstanceScore> instances;
    Aggregate aggregate;
    json metadata = json::object();
};

void to_json(json& j, const InstanceScore& s);
void from_json(const json& j, InstanceScore& s);
void to_json(json& j, const Aggregate& a);
void from_json(const json& j, Aggregate& a);
void to_json(json& j, const EvalResult& r);
void from_json(const json& j, EvalResult& r);

std::string metric_for(TaskKind kind);

/// Mean and standard error. Proportion metrics use sqrt(p(1-p)/n), others
/// the sample standard deviation over sqrt(n).
Aggregate aggregate_scores(const std::vector<InstanceScore>& scores, const std::string& metric);

struct ScoringContext {
    BackendRegistry* judges = nullptr;
    std::string judge_backend_id;
    chess::EnginePool* engine = nullptr;
    IllegalMovePolicy illegal_move_policy = IllegalMovePolicy::exclude;
    double illegal_move_penalty = 0.0;
};

InstanceScore score_transcript(const Transcript& t, ScoringContext& ctx);
EvalResult score_transcripts(const std::vector<Transcript>& transcripts, ScoringContext& ctx);

}  // namespace debate
