#include <gtest/gtest.h>

#include "debate/analysis.hpp"
#include "debate/csv.hpp"
#include "debate/errors.hpp"
#include "helpers.hpp"

using namespace debate;
using testing_support::config_for;
using testing_support::ScriptedWorld;
using testing_support::TempDir;

namespace {

AgentTurn turn(int agent, std::optional<std::string> v) {
    AgentTurn t;
    t.agent_index = agent;
    if (v) t.answer = ExtractedAnswer{AnswerKind::number, *v};
    return t;
}

std::vector<TaskInstance> tasks(int n) { return gen_arithmetic(n, 17); }

}  // namespace

TEST(Consensus, ConstructedRounds) {
    Round unanimous{turn(0, "5"), turn(1, "5"), turn(2, "5")};
    Round majority{turn(0, "5"), turn(1, "7"), turn(2, "7")};
    Round unparseable{turn(0, std::nullopt), turn(1, std::nullopt), turn(2, "3")};
    EXPECT_EQ(consensus_fraction(unanimous), 1.0);
    EXPECT_EQ(consensus_fraction(majority), 2.0 / 3.0);
    EXPECT_FALSE(consensus_fraction(unparseable));
    EXPECT_EQ(consensus_fraction(majority, ConsensusMetric::pairwise), 1.0 / 3.0);
    Round partly{turn(0, std::nullopt), turn(1, "4"), turn(2, "4")};
    EXPECT_EQ(consensus_fraction(partly), 1.0);
}

TEST(Consensus, CopyConsensusAgentsAgreeFromRoundOne) {
    ScriptedWorld w(json{{"a", {{"policy", "answer_oracle"}, {"initial", {"correct", "wrong", "wrong"}},
                              {"update", "copy_consensus"}}}});
    for (const auto& task : tasks(10)) {
        auto t = run_debate(task, config_for("a", 3, 4), *w.registry);
        auto series = consensus_series(t);
        ASSERT_EQ(series.size(), 5u);
        EXPECT_LT(*series[0].fraction, 1.0);
        for (std::size_t r = 1; r < series.size(); ++r) EXPECT_EQ(series[r].fraction, 1.0) << r;
        EXPECT_TRUE(series[0].correct.has_value());
    }
}

TEST(Sweep, AgentsAxisShapesConfigs) {
    ScriptedWorld w(json{{"o", {{"policy", "noisy_oracle"}}}});
    SweepOptions opt;
    opt.summarize_threshold = 4;
    opt.keep_transcripts = true;
    auto table = run_sweep(SweepAxis::agents, {1, 2, 4}, config_for("o", 3, 2), tasks(6), *w.registry, opt);
    ASSERT_EQ(table.points.size(), 3u);
    EXPECT_EQ(table.points[0].config.num_rounds, 0);
    EXPECT_EQ(table.points[0].result.metadata.at("method"), "single");
    EXPECT_EQ(table.points[1].result.metadata.at("method"), "debate");
    EXPECT_FALSE(table.points[1].config.summarize_others);
    EXPECT_TRUE(table.points[2].config.summarize_others);
    EXPECT_EQ(table.points[2].config.backend_ids.size(), 4u);
    EXPECT_EQ(table.points[2].transcripts.size(), 6u);
    EXPECT_EQ(table.points[2].consensus.size(), 3u);
    EXPECT_FALSE(table.points[0].consensus[0]);
}

TEST(Sweep, OtherAxesAndErrors) {
    ScriptedWorld w(json{{"o", {{"policy", "noisy_oracle"}}}});
    auto base = config_for("o", 3, 1);
    auto t = tasks(3);
    EXPECT_EQ(run_sweep(SweepAxis::rounds, {0, 3}, base, t, *w.registry).points[1].config.num_rounds, 3);
    auto styles = run_sweep(SweepAxis::prompt_style, {"short", "long"}, base, t, *w.registry);
    EXPECT_EQ(styles.points[0].config.prompt_style, PromptStyle::short_form);
    auto personas = run_sweep(SweepAxis::personas, {json::array({"a", "b", "c"})}, base, t, *w.registry);
    EXPECT_EQ(personas.points[0].label, "a|b|c");
    EXPECT_THROW(run_sweep(SweepAxis::rounds, {}, base, t, *w.registry), ConfigError);
    EXPECT_THROW(run_sweep(SweepAxis::rounds, {"x"}, base, t, *w.registry), ConfigError);
    EXPECT_THROW(parse_sweep_axis("temperature"), ConfigError);
}

TEST(Report, DeterministicFilesAndLayout) {
    ScriptedWorld w(json{{"o", {{"policy", "noisy_oracle"}}}});
    SweepOptions opt;
    opt.keep_transcripts = true;
    auto table = run_sweep(SweepAxis::agents, {1, 3}, config_for("o", 3, 2), tasks(8), *w.registry, opt);
    std::vector<Transcript> all;
    for (const auto& p : table.points) all.insert(all.end(), p.transcripts.begin(), p.transcripts.end());
    auto entries = sweep_report_entries(table, "arithmetic");
    TempDir d1("report1"), d2("report2");
    auto f1 = emit_report(entries, all, d1.path().string());
    auto f2 = emit_report(entries, all, d2.path().string());
    for (auto [a, b] : {std::pair{f1.summary_csv, f2.summary_csv}, {f1.instances_csv, f2.instances_csv},
                        {f1.consensus_csv, f2.consensus_csv}, {f1.summary_json, f2.summary_json}}) {
        EXPECT_EQ(read_file(a), read_file(b));
        EXPECT_EQ(std::filesystem::path(a).filename(), std::filesystem::path(b).filename());
    }
    auto rows = csv::parse(read_file(f1.summary_csv));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].fields, (csv::Row{"label", "arithmetic", "arithmetic_se", "arithmetic_n"}));
    EXPECT_EQ(rows[1].fields[0], "agents=1");
    EXPECT_EQ(rows[1].fields[3], "8");
    auto inst = csv::parse(read_file(f1.instances_csv));
    EXPECT_EQ(inst.size(), 17u);
    auto cons = csv::parse(read_file(f1.consensus_csv));
    EXPECT_EQ(cons.size(), 1u + 1u + 3u);
    EXPECT_THROW(emit_report({}, {}, d1.path().string()), Error);
}

TEST(Report, ConfigHashIsStable) {
    auto c = config_for("o", 3, 2);
    EXPECT_EQ(config_hash(c), config_hash(c));
    auto d = c;
    d.num_rounds = 3;
    EXPECT_NE(config_hash(c), config_hash(d));
    EXPECT_EQ(config_hash(c).size(), 16u);
}
