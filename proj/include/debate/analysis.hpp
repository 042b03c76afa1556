#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debate/debate.hpp"
#include "debate/scoring.hpp"

namespace debate {

enum class ConsensusMetric { plurality, pairwise };

/// Share of parseable answers equal to the round's plurality answer (or, with
/// `pairwise`, the share of agreeing agent pairs). Absent with fewer than two
/// parseable answers.
std::optional<double> consensus_fraction(const Round& round, ConsensusMetric metric = ConsensusMetric::plurality);

struct ConsensusPoint {
    int round = 0;
    std::optional<double> fraction;
    /// Whether the round's plurality answer is correct, when ground truth is
    /// exact.
    std::optional<bool> correct;
};

std::vector<ConsensusPoint> consensus_series(const Transcript& t, ConsensusMetric metric = ConsensusMetric::plurality);

enum class SweepAxis { agents, rounds, prompt_style, summarize, personas };

std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view s);

struct SweepOptions {
    /// Agents-axis points with at least this many agents summarize the other
    /// agents' responses; 0 disables.
    int summarize_threshold = 0;
    int parallelism = 1;
    bool keep_transcripts = false;
    ScoringContext* scoring = nullptr;
};

struct SweepPoint {
    std::string label;
    DebateConfig config;
    EvalResult result;
    /// Mean consensus fraction per round over instances where it is defined.
    std::vector<std::optional<double>> consensus;
    std::vector<Transcript> transcripts;
};

struct SweepTable {
    SweepAxis axis = SweepAxis::agents;
    std::vector<SweepPoint> points;
};

/// One evaluation per axis value with every other setting taken from `base`.
/// Values are integers for agents and rounds, "short"/"long" for
/// prompt_style, booleans for summarize and persona lists for personas. A
/// single-agent point runs without debate rounds.
SweepTable run_sweep(SweepAxis axis, const std::vector<json>& values, const DebateConfig& base,
                     const std::vector<TaskInstance>& tasks, BackendRegistry& backends, const SweepOptions& options = {});

struct ReportEntry {
    std::string label;
    std::string task_kind;
    std::string config_hash;
    EvalResult result;
};

struct ReportFiles {
    std::string summary_csv;
    std::string instances_csv;
    std::string consensus_csv;
    std::string summary_json;
};

/// Writes CSV tables and a JSON summary named after a hash of the entries'
/// configurations. Output is a pure function of the inputs. Throws Error
/// when `entries` is empty.
ReportFiles emit_report(const std::vector<ReportEntry>& entries, const std::vector<Transcript>& transcripts,
                        const std::string& out_dir);

std::vector<ReportEntry> sweep_report_entries(const SweepTable& table, const std::string& task_kind);

/// Hash of a config's canonical JSON, used to key output files.
std::string config_hash(const json& config);

}  // namespace debate
