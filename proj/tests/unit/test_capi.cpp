#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "debate/debate.h"

namespace fs = std::filesystem;

namespace {

const char* kSpec = R"({
  "task": {"kind": "arithmetic", "count": 6, "seed": 2},
  "method": "debate",
  "debate": {"num_agents": 3, "num_rounds": 1, "backend_ids": ["o", "o", "o"]},
  "backends": {"o": {"kind": "scripted", "policy": "noisy_oracle", "seed": 4}},
  "output_dir": "unused"
})";

fs::path scratch(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("capi-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(CApi, VersionAndStatusStrings) {
    EXPECT_STREQ(dbk_version(), "1.0.0");
    EXPECT_STREQ(dbk_status_string(DBK_OK), "ok");
    EXPECT_STREQ(dbk_status_string(DBK_ERR_BUFFER_TOO_SMALL), "buffer too small");
    EXPECT_STREQ(dbk_status_string(static_cast<dbk_status>(42)), "unknown status");
    EXPECT_EQ(dbk_set_log_level("warn"), DBK_OK);
    EXPECT_EQ(dbk_set_log_level("loud"), DBK_ERR_INVALID_ARGUMENT);
    EXPECT_STRNE(dbk_last_error(), "");
}

TEST(CApi, ExtractWithBufferSizing) {
    size_t needed = 0;
    char tiny[4];
    EXPECT_EQ(dbk_extract("arithmetic", "so the total is \\boxed{4215}.", tiny, sizeof tiny, &needed),
              DBK_ERR_BUFFER_TOO_SMALL);
    ASSERT_GT(needed, sizeof tiny);
    std::string buf(needed, '\0');
    ASSERT_EQ(dbk_extract("arithmetic", "so the total is \\boxed{4215}.", buf.data(), buf.size(), nullptr), DBK_OK);
    EXPECT_NE(std::string(buf.c_str()).find("4215"), std::string::npos);
    EXPECT_STREQ(dbk_last_error(), "");
    char out[16];
    ASSERT_EQ(dbk_extract("arithmetic", "no idea", out, sizeof out, nullptr), DBK_OK);
    EXPECT_STREQ(out, "null");
    EXPECT_EQ(dbk_extract("poetry", "x", out, sizeof out, nullptr), DBK_ERR_CONFIG);
    EXPECT_EQ(dbk_extract(nullptr, "x", out, sizeof out, nullptr), DBK_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ArithmeticAndChessUtilities) {
    const int64_t ops[6] = {12, 15, 21, 0, 3, 27};
    int64_t v = 0;
    ASSERT_EQ(dbk_eval_expression(ops, &v), DBK_OK);
    EXPECT_EQ(v, 12 + 15 * 21 + 0 - 3 * 27);

    uint64_t nodes = 0;
    ASSERT_EQ(dbk_perft(nullptr, 3, &nodes), DBK_OK);
    EXPECT_EQ(nodes, 8902u);
    ASSERT_EQ(dbk_perft("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", 2, &nodes), DBK_OK);
    EXPECT_EQ(nodes, 2039u);
    EXPECT_EQ(dbk_perft("not a fen", 1, &nodes), DBK_ERR_PARSE);

    int legal = -1;
    char uci[8];
    ASSERT_EQ(dbk_check_move("e4 e5 Nf3", "Nc6", &legal, uci, sizeof uci), DBK_OK);
    EXPECT_EQ(legal, 1);
    EXPECT_STREQ(uci, "b8c6");
    ASSERT_EQ(dbk_check_move("e4 e5", "Ke3", &legal, nullptr, 0), DBK_OK);
    EXPECT_EQ(legal, 0);
}

TEST(CApi, ExperimentErrors) {
    dbk_experiment* exp = nullptr;
    EXPECT_EQ(dbk_experiment_from_json("{", nullptr, &exp), DBK_ERR_PARSE);
    EXPECT_EQ(exp, nullptr);
    EXPECT_EQ(dbk_experiment_from_json(R"({"task": {"kind": "arithmetic"}})", nullptr, &exp), DBK_ERR_CONFIG);
    EXPECT_STREQ(dbk_last_error(), "backends is required");
    EXPECT_EQ(dbk_experiment_load("/nonexistent/spec.json", &exp), DBK_ERR_IO);
    EXPECT_EQ(dbk_run(nullptr, nullptr), DBK_ERR_INVALID_ARGUMENT);
    const char* none[] = {nullptr};
    dbk_result* r = nullptr;
    EXPECT_EQ(dbk_report(none, 0, "x", &r), DBK_ERR_INVALID_ARGUMENT);
}

TEST(CApi, RunScoreAndReport) {
    auto dir = scratch("run");
    dbk_experiment* exp = nullptr;
    ASSERT_EQ(dbk_experiment_from_json(kSpec, nullptr, &exp), DBK_OK) << dbk_last_error();
    ASSERT_EQ(dbk_experiment_set_output_dir(exp, dir.c_str()), DBK_OK);
    ASSERT_EQ(dbk_experiment_set_parallelism(exp, 2), DBK_OK);
    EXPECT_EQ(dbk_experiment_set_parallelism(exp, 0), DBK_ERR_CONFIG);
    EXPECT_NE(std::string(dbk_experiment_spec_json(exp)).find(dir.string()), std::string::npos);

    dbk_result* res = nullptr;
    ASSERT_EQ(dbk_run(exp, &res), DBK_OK) << dbk_last_error();
    double mean = -1, se = -1;
    int n = 0;
    ASSERT_EQ(dbk_result_aggregate(res, &mean, &se, &n), DBK_OK);
    EXPECT_EQ(n, 6);
    EXPECT_GE(mean, 0.0);
    EXPECT_LE(mean, 1.0);
    EXPECT_TRUE(fs::exists(dir / "transcripts.jsonl"));
    EXPECT_NE(std::string(dbk_result_json(res)).find("results_path"), std::string::npos);

    dbk_result* scored = nullptr;
    ASSERT_EQ(dbk_score(exp, (dir / "transcripts.jsonl").c_str(), &scored), DBK_OK) << dbk_last_error();
    double mean2 = -1;
    ASSERT_EQ(dbk_result_aggregate(scored, &mean2, nullptr, nullptr), DBK_OK);
    EXPECT_EQ(mean, mean2);

    const std::string results = (dir / "results.json").string();
    const char* paths[] = {results.c_str()};
    dbk_result* rep = nullptr;
    ASSERT_EQ(dbk_report(paths, 1, (dir / "rep").c_str(), &rep), DBK_OK) << dbk_last_error();
    EXPECT_EQ(dbk_result_aggregate(rep, &mean, &se, &n), DBK_ERR_INVALID_ARGUMENT);

    dbk_result_free(rep);
    dbk_result_free(scored);
    dbk_result_free(res);
    dbk_experiment_free(exp);
    fs::remove_all(dir);
}
