#include "debate/analysis.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "debate/csv.hpp"
#include "debate/errors.hpp"

namespace debate {

std::optional<double> consensus_fraction(const Round& round, ConsensusMetric metric) {
    std::vector<std::optional<ExtractedAnswer>> answers;
    std::vector<const ExtractedAnswer*> parsed;
    for (const auto& t : round) {
        answers.push_back(t.answer);
        if (t.answer) parsed.push_back(&*t.answer);
    }
    if (parsed.size() < 2) return std::nullopt;
    if (metric == ConsensusMetric::pairwise) {
        int agree = 0, pairs = 0;
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            for (std::size_t j = i + 1; j < parsed.size(); ++j) {
                ++pairs;
                if (parsed[i]->same_value(*parsed[j])) ++agree;
            }
        }
        return static_cast<double>(agree) / static_cast<double>(pairs);
    }
    auto top = majority_vote(answers);
    int count = 0;
    for (const auto* a : parsed) {
        if (a->same_value(*top)) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(parsed.size());
}

std::vector<ConsensusPoint> consensus_series(const Transcript& t, ConsensusMetric metric) {
    std::vector<ConsensusPoint> out;
    const bool exact = metric_for(t.task.kind()) == "accuracy";
    for (std::size_t r = 0; r < t.rounds.size(); ++r) {
        ConsensusPoint p;
        p.round = static_cast<int>(r);
        p.fraction = consensus_fraction(t.rounds[r], metric);
        if (exact) {
            auto top = select_final_answer(t.rounds[r], FinalRule::plurality);
            p.correct = top ? score_exact(*top, t.task) : false;
        }
        out.push_back(p);
    }
    return out;
}

std::string_view to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::agents: return "agents";
        case SweepAxis::rounds: return "rounds";
        case SweepAxis::prompt_style: return "prompt_style";
        case SweepAxis::summarize: return "summarize";
        case SweepAxis::personas: return "personas";
    }
    return "agents";
}

SweepAxis parse_sweep_axis(std::string_view s) {
    for (auto a : {SweepAxis::agents, SweepAxis::rounds, SweepAxis::prompt_style, SweepAxis::summarize,
                   SweepAxis::personas}) {
        if (to_string(a) == s) return a;
    }
    throw ConfigError("sweep.axis must be agents, rounds, prompt_style, summarize or personas, got '" +
                      std::string(s) + "'");
}

std::string config_hash(const json& config) { return short_hash(config.dump()); }

namespace {

std::string method_for(const DebateConfig& c) {
    if (c.num_agents == 1) return "single";
    return c.num_rounds == 0 ? "majority" : "debate";
}

DebateConfig apply(SweepAxis axis, const json& v, const DebateConfig& base, const SweepOptions& opt,
                   std::string& label) {
    DebateConfig c = base;
    try {
        switch (axis) {
            case SweepAxis::agents: {
                const int n = v.get<int>();
                c = base.with_agents(n);
                if (n == 1) {
                    c.num_rounds = 0;
                    c.summarize_others = false;
                } else if (opt.summarize_threshold > 0) {
                    c.summarize_others = n >= opt.summarize_threshold;
                }
                label = std::to_string(n);
                break;
            }
            case SweepAxis::rounds:
                c.num_rounds = v.get<int>();
                label = std::to_string(c.num_rounds);
                break;
            case SweepAxis::prompt_style:
                c.prompt_style = parse_prompt_style(v.get<std::string>());
                label = v.get<std::string>();
                break;
            case SweepAxis::summarize:
                c.summarize_others = v.get<bool>();
                label = c.summarize_others ? "true" : "false";
                break;
            case SweepAxis::personas:
                c.personas = v.get<std::vector<std::string>>();
                label.clear();
                for (const auto& p : c.personas) label += (label.empty() ? "" : "|") + p;
                if (label.empty()) label = "none";
                break;
        }
    } catch (const json::exception& e) {
        throw ConfigError("sweep.values: " + std::string(e.what()));
    }
    return c;
}

}  // namespace

SweepTable run_sweep(SweepAxis axis, const std::vector<json>& values, const DebateConfig& base,
                     const std::vector<TaskInstance>& tasks, BackendRegistry& backends, const SweepOptions& options) {
    if (values.empty()) throw ConfigError("sweep.values must not be empty");
    if (tasks.empty()) throw ConfigError("sweep needs at least one task instance");
    SweepTable table;
    table.axis = axis;
    ScoringContext default_scoring;
    ScoringContext& scoring = options.scoring ? *options.scoring : default_scoring;
    for (const auto& v : values) {
        SweepPoint pt;
        pt.config = apply(axis, v, base, options, pt.label);
        pt.config.validate(&backends);
        const std::string method = method_for(pt.config);
        std::vector<Transcript> ts(tasks.size());
        parallel_for(tasks.size(), options.parallelism,
                     [&](std::size_t i) { ts[i] = run_debate(tasks[i], pt.config, backends, method); });
        pt.result = score_transcripts(ts, scoring);
        pt.result.metadata["axis"] = to_string(axis);
        pt.result.metadata["value"] = pt.label;
        pt.result.metadata["method"] = method;
        pt.result.metadata["config_hash"] = config_hash(pt.config);
        std::vector<double> sums;
        std::vector<int> counts;
        for (const auto& t : ts) {
            auto series = consensus_series(t);
            if (series.size() > sums.size()) {
                sums.resize(series.size(), 0.0);
                counts.resize(series.size(), 0);
            }
            for (const auto& p : series) {
                if (!p.fraction) continue;
                sums[static_cast<std::size_t>(p.round)] += *p.fraction;
                ++counts[static_cast<std::size_t>(p.round)];
            }
        }
        for (std::size_t r = 0; r < sums.size(); ++r) {
            pt.consensus.push_back(counts[r] ? std::optional<double>(sums[r] / counts[r]) : std::nullopt);
        }
        if (options.keep_transcripts) pt.transcripts = std::move(ts);
        spdlog::info("sweep {}={}: {} {:.4f} +/- {:.4f} (n={})", to_string(axis), pt.label, pt.result.aggregate.metric,
                     pt.result.aggregate.mean, pt.result.aggregate.se, pt.result.aggregate.n);
        table.points.push_back(std::move(pt));
    }
    return table;
}

std::vector<ReportEntry> sweep_report_entries(const SweepTable& table, const std::string& task_kind) {
    std::vector<ReportEntry> out;
    for (const auto& p : table.points) {
        out.push_back({std::string(to_string(table.axis)) + "=" + p.label, task_kind, config_hash(p.config), p.result});
    }
    return out;
}

namespace {

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string opt_str(const std::optional<std::string>& s) { return s ? *s : std::string(); }

}  // namespace

ReportFiles emit_report(const std::vector<ReportEntry>& entries, const std::vector<Transcript>& transcripts,
                        const std::string& out_dir) {
    if (entries.empty()) throw Error("emit_report: empty result set");
    std::filesystem::create_directories(out_dir);

    json key = json::array();
    for (const auto& e : entries) key.push_back({e.label, e.task_kind, e.config_hash});
    const std::string hash = short_hash(key.dump());
    ReportFiles files;
    const auto path = [&](const std::string& stem, const std::string& ext) {
        return (std::filesystem::path(out_dir) / (stem + "_" + hash + ext)).string();
    };

    std::vector<std::string> labels;
    std::vector<std::string> kinds;
    std::map<std::pair<std::string, std::string>, const ReportEntry*> cell;
    for (const auto& e : entries) {
        if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) labels.push_back(e.label);
        if (std::find(kinds.begin(), kinds.end(), e.task_kind) == kinds.end()) kinds.push_back(e.task_kind);
        cell[{e.label, e.task_kind}] = &e;
    }

    std::string summary;
    std::vector<std::string> header{"label"};
    for (const auto& k : kinds) {
        header.push_back(k);
        header.push_back(k + "_se");
        header.push_back(k + "_n");
    }
    summary += csv::format_row(header);
    for (const auto& l : labels) {
        std::vector<std::string> row{l};
        for (const auto& k : kinds) {
            auto it = cell.find({l, k});
            if (it == cell.end()) {
                row.insert(row.end(), {"", "", ""});
                continue;
            }
            const auto& a = it->second->result.aggregate;
            row.push_back(fixed(a.mean));
            row.push_back(fixed(a.se));
            row.push_back(std::to_string(a.n));
        }
        summary += csv::format_row(row);
    }
    files.summary_csv = path("summary", ".csv");
    write_file(files.summary_csv, summary);

    std::string inst = csv::format_row(
        {"label", "task_kind", "task_id", "debate_id", "method", "status", "answer", "correct", "value"});
    for (const auto& e : entries) {
        for (const auto& s : e.result.instances) {
            inst += csv::format_row({e.label, e.task_kind, s.task_id, s.debate_id, s.method, s.status,
                                     opt_str(s.answer), s.correct ? (*s.correct ? "1" : "0") : "",
                                     s.value ? fixed(*s.value) : ""});
        }
    }
    files.instances_csv = path("instances", ".csv");
    write_file(files.instances_csv, inst);

    struct Acc {
        double frac_sum = 0.0;
        int frac_n = 0;
        int correct = 0;
        int graded = 0;
    };
    std::map<std::tuple<std::string, std::string, int>, Acc> rounds;
    std::map<std::string, std::string> group_method;
    for (const auto& t : transcripts) {
        if (t.status != DebateStatus::ok) continue;
        const std::string group = config_hash(t.config);
        for (const auto& p : consensus_series(t)) {
            auto& acc = rounds[{t.method, group, p.round}];
            if (p.fraction) {
                acc.frac_sum += *p.fraction;
                ++acc.frac_n;
            }
            if (p.correct) {
                ++acc.graded;
                if (*p.correct) ++acc.correct;
            }
        }
    }
    std::string cons = csv::format_row({"method", "config_hash", "round", "consensus", "plurality_accuracy", "n"});
    json consensus_json = json::array();
    for (const auto& [k, acc] : rounds) {
        const auto& [method, group, r] = k;
        const std::string frac = acc.frac_n ? fixed(acc.frac_sum / acc.frac_n) : "";
        const std::string accuracy = acc.graded ? fixed(static_cast<double>(acc.correct) / acc.graded) : "";
        cons += csv::format_row({method, group, std::to_string(r), frac, accuracy, std::to_string(acc.frac_n)});
        consensus_json.push_back({{"method", method},
                                  {"config_hash", group},
                                  {"round", r},
                                  {"consensus", acc.frac_n ? json(acc.frac_sum / acc.frac_n) : json(nullptr)},
                                  {"plurality_accuracy",
                                   acc.graded ? json(static_cast<double>(acc.correct) / acc.graded) : json(nullptr)}});
    }
    files.consensus_csv = path("consensus", ".csv");
    write_file(files.consensus_csv, cons);

    json sj{{"schema", "debate.report"}, {"schema_version", 1}, {"report_hash", hash}};
    json rows = json::array();
    for (const auto& e : entries) {
        rows.push_back({{"label", e.label},
                        {"task_kind", e.task_kind},
                        {"config_hash", e.config_hash},
                        {"aggregate", e.result.aggregate},
                        {"metadata", e.result.metadata}});
    }
    sj["entries"] = rows;
    sj["consensus"] = consensus_json;
    files.summary_json = path("summary", ".json");
    write_file(files.summary_json, sj.dump(2) + "\n");
    return files;
}

}  // namespace debate
