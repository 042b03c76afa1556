#include <gtest/gtest.h>

#include "debate/debate.hpp"
#include "debate/errors.hpp"
#include "helpers.hpp"
#include "invariants.hpp"

using namespace debate;
using testing_support::config_for;
using testing_support::ScriptedWorld;

namespace {

TaskInstance arith(const std::string& id = "arith-7") { return {id, ArithmeticTask{{12, 15, 21, 0, 3, 27}, 246}, {}}; }

json noisy(std::uint64_t seed = 1) { return {{"policy", "noisy_oracle"}, {"seed", seed}}; }

std::string dump(const Transcript& t) { return json(t).dump(); }

}  // namespace

TEST(DebateProperty, RandomCombosSatisfyInvariants) {
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        auto combo = invariants::random_combo(seed);
        ScriptedWorld w(combo.backends);
        auto t = run_debate(combo.task, combo.config, *w.registry);
        ASSERT_EQ(t.status, DebateStatus::ok) << combo.description << ": " << t.error;
        for (const auto& v : invariants::check(t)) ADD_FAILURE() << combo.description << ": " << v;
    }
}

TEST(Debate, RoundAndTurnShape) {
    ScriptedWorld w(json{{"o", noisy()}});
    auto t = run_debate(arith(), config_for("o", 3, 2), *w.registry);
    ASSERT_EQ(t.status, DebateStatus::ok);
    ASSERT_EQ(t.rounds.size(), 3u);
    for (const auto& r : t.rounds) ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(t.rounds[0][0].prompt_sent.size(), 1u);
    EXPECT_EQ(t.rounds[2][0].prompt_sent.size(), 5u);
    EXPECT_EQ(t.created_at, "1970-01-01T00:00:00Z");
    EXPECT_EQ(t.rounds[1][2].latency_ms, 0.0);
    EXPECT_TRUE(t.final_answer);
    EXPECT_TRUE(invariants::check(t).empty());
}

TEST(Debate, DeterministicAcrossRunsAndScheduling) {
    ScriptedWorld a(json{{"o", noisy(3)}});
    ScriptedWorld b(json{{"o", noisy(3)}});
    auto cfg = config_for("o", 4, 3);
    auto seq = cfg;
    seq.concurrent = false;
    for (int i = 0; i < 20; ++i) {
        auto task = arith("arith-" + std::to_string(i));
        const auto x = dump(run_debate(task, cfg, *a.registry));
        EXPECT_EQ(x, dump(run_debate(task, cfg, *b.registry)));
        auto y = run_debate(task, seq, *b.registry);
        y.config.concurrent = true;
        EXPECT_EQ(x, dump(y));
    }
}

TEST(Debate, DebateIdTracksConfig) {
    auto c = config_for("o", 3, 2);
    const auto id = make_debate_id("t", "debate", c);
    EXPECT_EQ(id, make_debate_id("t", "debate", c));
    EXPECT_NE(id, make_debate_id("t2", "debate", c));
    EXPECT_NE(id, make_debate_id("t", "majority", c));
    auto d = c;
    d.sampling.seed = 9;
    EXPECT_NE(id, make_debate_id("t", "debate", d));
    d = c;
    d.prompt_style = PromptStyle::short_form;
    EXPECT_NE(id, make_debate_id("t", "debate", d));
}

TEST(Debate, ValidationNamesTheField) {
    auto expect_msg = [](DebateConfig c, const std::string& needle, const BackendRegistry* reg = nullptr) {
        try {
            c.validate(reg);
            FAIL() << needle;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    expect_msg(config_for("o", 0, 0), "debate.num_agents");
    expect_msg(config_for("o", 3, -1), "debate.num_rounds");
    expect_msg(config_for("o", 1, 2), "debate.num_agents");
    auto c = config_for("o", 3, 1);
    c.personas = {"a"};
    expect_msg(c, "debate.personas");
    c = config_for("o", 3, 1);
    c.backend_ids.pop_back();
    expect_msg(c, "debate.backend_ids");
    c = config_for("o", 3, 1);
    c.sampling.temperature = -1;
    expect_msg(c, "debate.sampling.temperature");
    ScriptedWorld w(json{{"o", noisy()}});
    expect_msg(config_for("zz", 3, 1), "debate.backend_ids: unknown backend 'zz'", w.registry.get());
    c = config_for("o", 3, 1);
    c.summarizer_backend_id = "ghost";
    expect_msg(c, "debate.summarizer_backend_id", w.registry.get());
}

TEST(Debate, WithAgentsResizes) {
    auto c = config_for("o", 2, 1);
    c.backend_ids = {"a", "b"};
    c.personas = {"p", "q"};
    auto d = c.with_agents(5);
    EXPECT_EQ(d.backend_ids, (std::vector<std::string>{"a", "b", "b", "b", "b"}));
    EXPECT_EQ(d.personas, (std::vector<std::string>{"p", "q", "p", "q", "p"}));
    EXPECT_NO_THROW(d.validate());
}

TEST(Debate, MajorityMakesNoDebateCalls) {
    ScriptedWorld w(json{{"s", {{"responses", {"the answer is 5"}}}}});
    auto t = run_debate(arith(), config_for("s", 3, 0), *w.registry, "majority");
    // A single scripted response per agent suffices: exhausting it would fail.
    ASSERT_EQ(t.status, DebateStatus::ok) << t.error;
    EXPECT_EQ(t.rounds.size(), 1u);
    EXPECT_EQ(t.method, "majority");
}

TEST(Debate, SummariesCoverOtherAgentsOnly) {
    ScriptedWorld w(json{{"o", noisy()}, {"d", {{"policy", "answer_digest"}}}});
    auto cfg = config_for("o", 4, 2);
    cfg.summarize_others = true;
    cfg.summarizer_backend_id = "d";
    auto t = run_debate(arith(), cfg, *w.registry);
    ASSERT_EQ(t.status, DebateStatus::ok);
    ASSERT_EQ(t.summaries.size(), 8u);
    for (const auto& s : t.summaries) {
        EXPECT_EQ(s.sources.size(), 3u);
        EXPECT_EQ(std::count(s.sources.begin(), s.sources.end(), s.for_agent), 0);
        EXPECT_EQ(std::count(s.text.begin(), s.text.end(), '\n'), 2);
    }
    for (std::size_t r = 1; r < t.rounds.size(); ++r) {
        for (const auto& turn : t.rounds[r]) {
            const auto& m = turn.prompt_sent.back().content;
            EXPECT_NE(m.find("Summary of the other agents' solutions: ```One agent answered"), std::string::npos);
            EXPECT_EQ(m.find("One agent solution"), std::string::npos);
        }
    }
    EXPECT_TRUE(invariants::check(t).empty());
}

TEST(Debate, SummarizeResponsesNeedsInput) {
    ScriptedWorld w(json{{"d", {{"policy", "answer_digest"}}}});
    auto task = arith();
    CallContext ctx;
    ctx.task = &task;
    EXPECT_THROW(summarize_responses({}, "d", *w.registry, ctx, {}), EmptyContext);
    EXPECT_EQ(summarize_responses({{1, "answer is 3"}}, "d", *w.registry, ctx, {}), "One agent answered 3.");
}

TEST(Debate, OverflowTrimsThenSummarizes) {
    // Full history of round 2 exceeds the limit; the trimmed one fits.
    auto run_with_limit = [](std::size_t limit) {
        ScriptedWorld w(json{{"o", {{"policy", "noisy_oracle"}, {"max_context_chars", limit}}},
                             {"d", {{"policy", "answer_digest"}}}});
        auto cfg = config_for("o", 3, 2);
        cfg.summarizer_backend_id = "d";
        return run_debate(arith(), cfg, *w.registry);
    };
    auto kinds = [](const Transcript& t) {
        std::vector<std::string> k;
        for (const auto& e : t.events) k.push_back(e.kind);
        return k;
    };
    auto roomy = run_with_limit(100000);
    EXPECT_TRUE(roomy.events.empty());
    std::size_t full_r2 = 0, first_r1 = 0;
    for (const auto& m : roomy.rounds[2][0].prompt_sent) full_r2 += m.content.size();
    for (const auto& m : roomy.rounds[1][0].prompt_sent) first_r1 += m.content.size();
    ASSERT_LT(first_r1, full_r2);

    auto trimmed = run_with_limit(full_r2 - 1);
    ASSERT_EQ(trimmed.status, DebateStatus::ok) << trimmed.error;
    auto k = kinds(trimmed);
    ASSERT_FALSE(k.empty());
    for (const auto& e : k) EXPECT_EQ(e, "overflow_trim");
    const auto& p = trimmed.rounds[2][0].prompt_sent;
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0], roomy.rounds[0][0].prompt_sent[0]);
    EXPECT_EQ(p[1].role, Role::assistant);
    EXPECT_TRUE(invariants::check(trimmed).empty());

    auto summarized = run_with_limit(first_r1 - 1);
    ASSERT_EQ(summarized.status, DebateStatus::ok) << summarized.error;
    k = kinds(summarized);
    EXPECT_NE(std::find(k.begin(), k.end(), "overflow_summarize"), k.end());
    EXPECT_FALSE(summarized.summaries.empty());
    EXPECT_TRUE(invariants::check(summarized).empty());

    auto hopeless = run_with_limit(20);
    EXPECT_EQ(hopeless.status, DebateStatus::failed);
    EXPECT_FALSE(hopeless.final_answer);
}

TEST(Debate, BackendFailureKeepsPartialTranscript) {
    ScriptedWorld w(json{{"s", {{"per_agent", {{"answer 1", "answer 1"}, {"answer 2"}, {"answer 3", "answer 3"}}}}}});
    auto t = run_debate(arith(), config_for("s", 3, 2), *w.registry);
    EXPECT_EQ(t.status, DebateStatus::failed);
    EXPECT_NE(t.error.find("exhausted"), std::string::npos);
    ASSERT_EQ(t.rounds.size(), 1u);
    EXPECT_FALSE(t.final_answer);
    EXPECT_TRUE(invariants::check(t).empty());
}

TEST(Debate, TransientFailuresAreRetriedAndCounted) {
    ScriptedWorld w(json{{"o", {{"policy", "noisy_oracle"}, {"fail_first", 2}}}});
    auto t = run_debate(arith(), config_for("o", 2, 1), *w.registry);
    ASSERT_EQ(t.status, DebateStatus::ok);
    for (const auto& r : t.rounds) {
        for (const auto& turn : r) EXPECT_EQ(turn.attempts, 3);
    }
}

TEST(Debate, PersonasBecomeSystemMessages) {
    ScriptedWorld w(json{{"o", noisy()}});
    auto cfg = config_for("o", 2, 1);
    cfg.personas = {"lawyer", "doctor"};
    auto t = run_debate(arith(), cfg, *w.registry);
    EXPECT_EQ(t.rounds[1][1].prompt_sent[0].role, Role::system);
    EXPECT_NE(t.rounds[1][1].prompt_sent[0].content.find("doctor"), std::string::npos);
    EXPECT_TRUE(invariants::check(t).empty());
}

TEST(Debate, ConfidenceProbeOnFinalRound) {
    ScriptedWorld w(json{{"o", {{"policy", "noisy_oracle"}, {"confidence", "90%"}}}});
    auto cfg = config_for("o", 3, 1);
    cfg.probe_confidence = true;
    auto t = run_debate(arith(), cfg, *w.registry);
    for (const auto& turn : t.rounds.back()) EXPECT_EQ(turn.confidence, "90%");
    for (const auto& turn : t.rounds.front()) EXPECT_FALSE(turn.confidence);
    EXPECT_TRUE(invariants::check(t).empty());
}

TEST(Debate, CopyConsensusConverges) {
    ScriptedWorld w(json{{"a", {{"policy", "answer_oracle"}, {"initial", {"5", "7", "7"}}, {"update", "copy_consensus"}}}});
    auto t = run_debate(arith(), config_for("a", 3, 2), *w.registry);
    for (std::size_t r = 1; r < t.rounds.size(); ++r) {
        for (const auto& turn : t.rounds[r]) EXPECT_EQ(turn.answer->value, "7");
    }
}

TEST(Debate, ShortStyleUsesShortPersuadability) {
    ScriptedWorld w(json{{"a", {{"policy", "answer_oracle"}, {"initial", {"1", "2", "2"}},
                              {"update_long", "keep"}, {"update_short", "adopt_plurality_others"}}}});
    auto cfg = config_for("a", 3, 1);
    auto long_run = run_debate(arith(), cfg, *w.registry);
    EXPECT_EQ(long_run.rounds[1][0].answer->value, "1");
    cfg.prompt_style = PromptStyle::short_form;
    auto short_run = run_debate(arith(), cfg, *w.registry);
    EXPECT_EQ(short_run.rounds[1][0].answer->value, "2");
}

TEST(Debate, FinalRules) {
    auto num = [](int agent, const char* v) {
        AgentTurn t;
        t.agent_index = agent;
        t.answer = ExtractedAnswer{AnswerKind::number, v};
        return t;
    };
    Round r{num(0, "1"), num(1, "2"), num(2, "2")};
    EXPECT_EQ(select_final_answer(r)->value, "2");
    EXPECT_EQ(select_final_answer(r, FinalRule::first_agent)->value, "1");
    Round none{AgentTurn{}, AgentTurn{}};
    EXPECT_FALSE(select_final_answer(none));
}

TEST(Reflection, SingleAgentSelfReview) {
    ScriptedWorld w(json{{"a", {{"policy", "answer_oracle"}, {"initial", {"wrong"}}, {"reflection", "revise_to_correct"}}}});
    auto t = run_reflection(arith(), config_for("a", 1, 0), *w.registry, 2);
    ASSERT_EQ(t.status, DebateStatus::ok) << t.error;
    EXPECT_EQ(t.method, "reflection");
    ASSERT_EQ(t.rounds.size(), 3u);
    EXPECT_NE(t.rounds[0][0].answer->value, "246");
    EXPECT_EQ(t.final_answer->value, "246");
    EXPECT_EQ(t.rounds[1][0].prompt_sent.size(), 3u);
    EXPECT_EQ(t.rounds[1][0].prompt_sent.back().content, build_reflection_prompt().content);
}

TEST(Transcript, JsonRoundTrip) {
    ScriptedWorld w(json{{"o", noisy()}, {"d", {{"policy", "answer_digest"}}}});
    auto cfg = config_for("o", 3, 2);
    cfg.summarize_others = true;
    cfg.summarizer_backend_id = "d";
    cfg.probe_confidence = true;
    auto t = run_debate(arith(), cfg, *w.registry);
    json j = t;
    EXPECT_EQ(j.at("schema"), "debate.transcript");
    EXPECT_EQ(j.at("schema_version"), 1);
    auto back = j.get<Transcript>();
    EXPECT_EQ(json(back).dump(), j.dump());
    j["schema_version"] = 99;
    EXPECT_THROW(j.get<Transcript>(), ParseError);
}
