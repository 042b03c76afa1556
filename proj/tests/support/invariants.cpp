#include "invariants.hpp"

#include <map>
#include <sstream>

#include "debate/extract.hpp"
#include "debate/util.hpp"

namespace invariants {

using namespace debate;

namespace {

std::string block(int agent, const std::string& text) {
    return "\n\nOne agent solution (agent " + std::to_string(agent) + "): ```" + text + "```";
}

std::string summary_block(const std::string& text) { return "\n\nSummary of the other agents' solutions: ```" + text + "```"; }

bool has_event(const Transcript& t, int round, int agent, const std::string& kind) {
    for (const auto& e : t.events) {
        if (e.round == round && e.agent == agent && e.kind == kind) return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> check(const Transcript& t) {
    std::vector<std::string> bad;
    auto fail = [&](int r, int i, const std::string& what) {
        bad.push_back(t.task.task_id + " round " + std::to_string(r) + " agent " + std::to_string(i) + ": " + what);
    };
    const auto& c = t.config;
    const bool reflection = t.method == "reflection";
    if (t.status == DebateStatus::ok) {
        if (!reflection && static_cast<int>(t.rounds.size()) != c.num_rounds + 1) {
            fail(-1, -1, "expected " + std::to_string(c.num_rounds + 1) + " rounds, got " + std::to_string(t.rounds.size()));
        }
    } else if (t.error.empty()) {
        fail(-1, -1, "failed transcript without an error message");
    }
    std::map<std::pair<int, int>, const SummaryRecord*> summaries;
    for (const auto& s : t.summaries) summaries[{s.round, s.for_agent}] = &s;

    for (std::size_t r = 0; r < t.rounds.size(); ++r) {
        const auto& round = t.rounds[r];
        const int ri = static_cast<int>(r);
        if (static_cast<int>(round.size()) != c.num_agents) fail(ri, -1, "wrong number of turns");
        for (std::size_t k = 0; k < round.size(); ++k) {
            const auto& turn = round[k];
            const int i = turn.agent_index;
            if (i != static_cast<int>(k)) fail(ri, i, "turns out of agent order");
            if (turn.prompt_sent.empty() || turn.prompt_sent.back().role != Role::user) {
                fail(ri, i, "prompt does not end with a user message");
                continue;
            }
            auto expected_answer = extract_answer(t.task.kind(), turn.response);
            if (expected_answer.has_value() != turn.answer.has_value() ||
                (expected_answer && expected_answer->value != turn.answer->value)) {
                fail(ri, i, "recorded answer differs from extraction");
            }
            const std::string& msg = turn.prompt_sent.back().content;
            if (r == 0) {
                if (msg.find("One agent solution") != std::string::npos) fail(ri, i, "initial prompt has context");
                continue;
            }
            if (reflection) continue;
            // Context: exactly the other agents of round r-1, in index order.
            auto sit = summaries.find({ri, i});
            if (sit != summaries.end() && msg.find(summary_block(sit->second->text)) != std::string::npos) {
                std::vector<int> want;
                for (const auto& o : t.rounds[r - 1]) {
                    if (o.agent_index != i) want.push_back(o.agent_index);
                }
                if (sit->second->sources != want) fail(ri, i, "summary sources are not the other agents");
                if (msg.find("One agent solution") != std::string::npos) fail(ri, i, "summary prompt also has raw blocks");
            } else {
                if (c.summarize_others) fail(ri, i, "summarized prompt without a matching summary record");
                std::string ctx;
                for (const auto& o : t.rounds[r - 1]) {
                    if (o.agent_index != i) ctx += block(o.agent_index, o.response);
                }
                if (msg.find(ctx) == std::string::npos) fail(ri, i, "context is not the other agents' previous responses");
                if (msg.find("(agent " + std::to_string(i) + "): ") != std::string::npos) {
                    fail(ri, i, "agent sees its own block");
                }
                std::size_t blocks = 0;
                for (std::size_t p = msg.find("One agent solution"); p != std::string::npos;
                     p = msg.find("One agent solution", p + 1))
                    ++blocks;
                if (blocks != t.rounds[r - 1].size() - 1) fail(ri, i, "wrong number of context blocks");
            }
            // Monotone history: previous prompt, own previous response, new message.
            const auto& prev = t.rounds[r - 1][k];
            if (has_event(t, ri, i, "overflow_trim")) continue;
            History want = prev.prompt_sent;
            want.push_back({Role::assistant, prev.response});
            want.push_back(turn.prompt_sent.back());
            if (turn.prompt_sent != want) fail(ri, i, "history is not an extension of the previous round");
        }
    }
    if (t.status == DebateStatus::ok && !t.rounds.empty()) {
        auto final = select_final_answer(t.rounds.back(), c.final_rule);
        if (final.has_value() != t.final_answer.has_value() || (final && final->value != t.final_answer->value)) {
            fail(-1, -1, "final answer is not the last round's plurality");
        }
    }
    return bad;
}

Combo random_combo(std::uint64_t seed) {
    SplitMix64 rng(seed);
    Combo c;
    const int kind = static_cast<int>(rng.uniform_int(0, 4));
    const std::string id = "case-" + std::to_string(seed);
    switch (kind) {
        case 0: {
            ArithmeticTask a;
            for (auto& v : a.operands) v = rng.uniform_int(0, 30);
            a.answer = a.operands[0] + a.operands[1] * a.operands[2] + a.operands[3] - a.operands[4] * a.operands[5];
            c.task = {id, a, {}};
            break;
        }
        case 1: c.task = {id, Gsm8kTask{"How many?", static_cast<double>(rng.uniform_int(1, 500))}, {}}; break;
        case 2: c.task = {id, MmluTask{"s", "Which?", {"a", "b", "c", "d"}, "ABCD"[rng.uniform_int(0, 3)]}, {}}; break;
        case 3: c.task = {id, ChessValidityTask{"e2e4 e7e5", "g1", {"e2", "f3", "h3"}}, {}}; break;
        default: c.task = {id, BiographyTask{"Ada Lovelace", {"fact"}}, {}}; break;
    }
    const int agents = static_cast<int>(rng.uniform_int(1, 6));
    const int rounds = agents == 1 ? 0 : static_cast<int>(rng.uniform_int(0, 4));
    c.config.num_agents = agents;
    c.config.num_rounds = rounds;
    c.config.prompt_style = rng.uniform() < 0.5 ? PromptStyle::short_form : PromptStyle::long_form;
    c.config.summarize_others = rounds > 0 && rng.uniform() < 0.3;
    c.config.concurrent = rng.uniform() < 0.5;
    c.config.sampling.seed = static_cast<std::int64_t>(rng.uniform_int(0, 1000));
    if (rng.uniform() < 0.3) {
        for (int i = 0; i < agents; ++i) c.config.personas.push_back(i % 2 ? "careful mathematician" : "skeptic");
    }
    if (rng.uniform() < 0.2) c.config.final_rule = FinalRule::first_agent;

    c.backends = json::object();
    const int policy = kind == 4 ? 2 : static_cast<int>(rng.uniform_int(0, 2));
    for (int b = 0; b < 2; ++b) {
        json spec{{"kind", "scripted"}};
        if (policy == 0) {
            spec["policy"] = "noisy_oracle";
            spec["accuracy"] = rng.uniform();
            spec["persuadability"] = rng.uniform();
            spec["seed"] = rng.next() % 1000;
        } else if (policy == 1) {
            spec["policy"] = "answer_oracle";
            spec["initial"] = {"correct", "wrong", "wrong"};
            spec["update"] = std::vector<std::string>{"keep", "adopt_plurality_others", "copy_consensus",
                                                      "revise_to_correct"}[rng.uniform_int(0, 3)];
        } else {
            // Distinct text per agent and call so provenance is checkable.
            spec["policy"] = "fixed_sequence";
            json per = json::array();
            for (int i = 0; i < agents; ++i) {
                json seq = json::array();
                for (int r = 0; r <= rounds; ++r) {
                    seq.push_back("backend " + std::to_string(b) + " agent " + std::to_string(i) + " call " +
                                  std::to_string(r) + " says " + std::to_string(rng.uniform_int(1, 3)));
                }
                per.push_back(seq);
            }
            spec["per_agent"] = per;
            spec["cycle"] = true;
        }
        c.backends["b" + std::to_string(b)] = spec;
    }
    c.backends["digest"] = {{"kind", "scripted"}, {"policy", "answer_digest"}};
    for (int i = 0; i < agents; ++i) c.config.backend_ids.push_back(rng.uniform() < 0.5 ? "b0" : "b1");
    if (c.config.summarize_others) c.config.summarizer_backend_id = "digest";
    std::ostringstream d;
    d << "seed=" << seed << " kind=" << to_string(c.task.kind()) << " agents=" << agents << " rounds=" << rounds
      << " policy=" << policy << " summarize=" << c.config.summarize_others;
    c.description = d.str();
    return c;
}

}  // namespace invariants
