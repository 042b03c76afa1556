#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "debate/analysis.hpp"
#include "debate/debate.hpp"
#include "debate/scoring.hpp"

namespace debate {

enum class Method { single, reflection, majority, debate };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct TaskSource {
    TaskKind kind = TaskKind::arithmetic;
    std::string path;
    int count = 100;
    std::uint64_t seed = 0;
    std::int64_t range_lo = 0;
    std::int64_t range_hi = 30;
};

struct EngineSpec {
    std::vector<std::string> command;
    int depth = 20;
    int pool = 1;
};

struct ScoringSpec {
    std::string judge_backend_id;
    std::optional<EngineSpec> engine;
    IllegalMovePolicy illegal_move_policy = IllegalMovePolicy::exclude;
    double illegal_move_penalty = 0.0;
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::agents;
    std::vector<json> values;
    int summarize_threshold = 0;
};

struct ExperimentSpec {
    TaskSource task;
    Method method = Method::debate;
    DebateConfig debate;
    int reflection_rounds = 1;
    json backends = json::object();
    ScoringSpec scoring;
    std::string output_dir = "runs/out";
    bool resume = false;
    int parallelism = 1;
    /// Fixed timestamps and zero latencies; defaults to on when every backend
    /// is scripted.
    std::optional<bool> deterministic_clock;
    std::optional<SweepSpec> sweep;

    /// Parses and validates. Relative dataset paths resolve against
    /// `base_dir`. Throws ConfigError naming the field.
    static ExperimentSpec from_json(const json& j, const std::string& base_dir = ".");
    static ExperimentSpec load(const std::string& path);
    json to_json() const;
    void validate() const;
    bool all_scripted() const;
};

std::vector<TaskInstance> load_tasks(const TaskSource& source);

/// Writes JSON lines in submission-index order regardless of completion order.
class OrderedAppender {
public:
    OrderedAppender(const std::string& path, std::size_t first_index = 0);
    void submit(std::size_t index, std::string line);
    /// Marks `index` as produced elsewhere so later lines are not held back.
    void skip(std::size_t index);

private:
    void drain();

    std::mutex mu_;
    std::ofstream out_;
    std::size_t next_;
    std::map<std::size_t, std::optional<std::string>> pending_;
};

/// Every record in a transcripts file; a later record for the same
/// debate_id replaces an earlier one.
std::vector<Transcript> read_transcripts(const std::string& path);

struct ExperimentOutcome {
    EvalResult result;
    std::vector<Transcript> transcripts;
    int reused = 0;
    std::string results_path;
    std::string transcripts_path;
    std::optional<ReportFiles> report;
};

/// Runs one method over the task set, persisting transcripts, results and
/// the resolved spec in the output directory. On resume, debates already
/// recorded with status ok are reused.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

/// Runs spec.sweep and writes per-point results plus a report.
SweepTable run_sweep_experiment(const ExperimentSpec& spec, ReportFiles* report = nullptr);

/// Re-scores persisted transcripts with the spec's scoring settings.
EvalResult score_transcript_file(const ExperimentSpec& spec, const std::string& transcripts_path);

/// Builds a report from results files written by run_experiment.
ReportFiles report_from_results(const std::vector<std::string>& results_paths, const std::string& out_dir);

}  // namespace debate
