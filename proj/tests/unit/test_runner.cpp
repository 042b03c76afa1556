#include <gtest/gtest.h>

#include <sstream>

#include "debate/errors.hpp"
#include "debate/runner.hpp"
#include "helpers.hpp"

using namespace debate;
using testing_support::fixture;
using testing_support::TempDir;

namespace {

json base_spec(const std::string& out) {
    return json{{"task", {{"kind", "arithmetic"}, {"count", 10}, {"seed", 3}}},
                {"method", "debate"},
                {"debate", {{"num_agents", 3}, {"num_rounds", 2}, {"backend_ids", {"o", "o", "o"}}}},
                {"backends", {{"o", {{"kind", "scripted"}, {"policy", "noisy_oracle"}, {"seed", 5}}}}},
                {"output_dir", out},
                {"parallelism", 3}};
}

std::string config_error(const json& j) {
    try {
        ExperimentSpec::from_json(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(ExperimentSpec, ValidationNamesTheField) {
    auto j = base_spec("x");
    j["method"] = "majority";
    EXPECT_EQ(config_error(j), "debate.num_rounds must be 0 for method majority");
    j["debate"]["num_rounds"] = 0;
    EXPECT_EQ(config_error(j), "");
    j = base_spec("x");
    j["method"] = "reflection";
    EXPECT_EQ(config_error(j), "debate.num_agents must be 1 for method reflection");
    j = base_spec("x");
    j["backends"]["o"]["api_key"] = "sk-123";
    EXPECT_EQ(config_error(j), "backends.o.api_key is not allowed; name an environment variable in auth_env");
    j = base_spec("x");
    j["method"] = "vote";
    EXPECT_NE(config_error(j).find("method must be"), std::string::npos);
    j = base_spec("x");
    j["task"]["kind"] = "gsm8k";
    EXPECT_EQ(config_error(j), "task.path is required for task kind gsm8k");
    j = base_spec("x");
    j["debate"]["backend_ids"] = {"o", "o", "missing"};
    EXPECT_EQ(config_error(j), "debate.backend_ids: unknown backend 'missing'");
    j = base_spec("x");
    j["parallelism"] = 0;
    EXPECT_EQ(config_error(j), "parallelism must be >= 1");
    EXPECT_EQ(config_error(json::array()), "experiment spec must be a JSON object");
}

TEST(ExperimentSpec, RoundTripAndPaths) {
    auto j = base_spec("runs/a");
    j["task"] = {{"kind", "gsm8k"}, {"path", "data/gsm.jsonl"}, {"count", 4}};
    auto s = ExperimentSpec::from_json(j, "/base");
    EXPECT_EQ(s.task.path, "/base/data/gsm.jsonl");
    EXPECT_EQ(s.output_dir, "/base/runs/a");
    EXPECT_TRUE(s.all_scripted());
    auto again = ExperimentSpec::from_json(s.to_json());
    EXPECT_EQ(again.to_json(), s.to_json());
}

TEST(OrderedAppender, WritesInIndexOrder) {
    TempDir d("appender");
    {
        OrderedAppender a(d.file("out.jsonl"));
        a.submit(2, "c");
        a.submit(0, "a");
        a.skip(1);
        a.submit(4, "e");
        a.submit(3, "d");
    }
    EXPECT_EQ(read_file(d.file("out.jsonl")), "a\nc\nd\ne\n");
}

TEST(ReadTranscripts, LaterRecordWins) {
    TempDir d("read");
    testing_support::ScriptedWorld w(json{{"o", {{"policy", "noisy_oracle"}}}});
    auto task = gen_arithmetic(1, 1)[0];
    auto t = run_debate(task, testing_support::config_for("o", 2, 1), *w.registry);
    auto failed = t;
    failed.status = DebateStatus::failed;
    failed.error = "boom";
    write_file(d.file("t.jsonl"), json(failed).dump() + "\n\n" + json(t).dump() + "\n");
    auto all = read_transcripts(d.file("t.jsonl"));
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].status, DebateStatus::ok);
}

TEST(RunExperiment, WritesOutputsAndResumes) {
    TempDir d("run");
    auto spec = ExperimentSpec::from_json(base_spec(d.file("out")));
    auto first = run_experiment(spec);
    EXPECT_EQ(first.result.aggregate.n, 10);
    EXPECT_EQ(first.reused, 0);
    for (auto f : {"transcripts.jsonl", "results.json", "spec.resolved.json"}) {
        EXPECT_TRUE(std::filesystem::exists(d.path() / "out" / f)) << f;
    }
    ASSERT_TRUE(first.report);
    const auto full = read_file(first.transcripts_path);
    auto lines = lines_of(full);
    ASSERT_EQ(lines.size(), 10u);

    std::string partial;
    for (int i = 0; i < 4; ++i) partial += lines[i] + "\n";
    write_file(first.transcripts_path, partial);
    spec.resume = true;
    auto second = run_experiment(spec);
    EXPECT_EQ(second.reused, 4);
    EXPECT_EQ(read_file(first.transcripts_path), full);
    EXPECT_EQ(json(second.result.aggregate), json(first.result.aggregate));

    auto third = run_experiment(spec);
    EXPECT_EQ(third.reused, 10);
}

TEST(RunExperiment, MethodsShapeTranscripts) {
    TempDir d("methods");
    auto j = base_spec(d.file("single"));
    j["method"] = "single";
    auto single = run_experiment(ExperimentSpec::from_json(j));
    EXPECT_EQ(single.transcripts[0].config.num_agents, 1);
    EXPECT_EQ(single.result.metadata.at("method"), "single");

    j = base_spec(d.file("majority"));
    j["method"] = "majority";
    j["debate"]["num_rounds"] = 0;
    auto maj = run_experiment(ExperimentSpec::from_json(j));
    EXPECT_EQ(maj.transcripts[0].rounds.size(), 1u);
    EXPECT_EQ(maj.transcripts[0].rounds[0].size(), 3u);

    j = base_spec(d.file("reflection"));
    j["method"] = "reflection";
    j["debate"]["num_agents"] = 1;
    j["debate"]["backend_ids"] = {"o"};
    j["reflection_rounds"] = 2;
    auto refl = run_experiment(ExperimentSpec::from_json(j));
    EXPECT_EQ(refl.transcripts[0].rounds.size(), 3u);
}

TEST(RunExperiment, RescoreAndReport) {
    TempDir d("rescore");
    auto spec = ExperimentSpec::from_json(base_spec(d.file("out")));
    auto out = run_experiment(spec);
    auto rescored = score_transcript_file(spec, out.transcripts_path);
    EXPECT_EQ(json(rescored.aggregate), json(out.result.aggregate));
    auto files = report_from_results({out.results_path}, d.file("report"));
    EXPECT_NE(read_file(files.summary_csv).find("debate"), std::string::npos);
    EXPECT_THROW(report_from_results({d.file("missing.json")}, d.file("r2")), Error);
}

TEST(RunSweep, WritesSweepJson) {
    TempDir d("sweep");
    auto j = base_spec(d.file("out"));
    j["task"]["count"] = 4;
    j["sweep"] = {{"axis", "rounds"}, {"values", {0, 1, 2}}};
    ReportFiles files;
    auto table = run_sweep_experiment(ExperimentSpec::from_json(j), &files);
    ASSERT_EQ(table.points.size(), 3u);
    auto sweep = json::parse(read_file(d.file("out/sweep.json")));
    EXPECT_EQ(sweep.at("axis"), "rounds");
    EXPECT_EQ(sweep.at("points").size(), 3u);
    EXPECT_TRUE(std::filesystem::exists(files.summary_csv));
}
