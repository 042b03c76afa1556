#include <gtest/gtest.h>

#include <cmath>

#include "debate/chess.hpp"
#include "debate/errors.hpp"
#include "debate/scoring.hpp"
#include "debate/tasks.hpp"
#include "debate/uci_engine.hpp"
#include "debate/util.hpp"
#include "helpers.hpp"

using namespace debate;
using testing_support::fixture;

TEST(UciInfo, ParsesScores) {
    auto s = chess::parse_info_score("info depth 20 seldepth 31 multipv 1 score cp -37 nodes 1 pv e2e4");
    ASSERT_TRUE(s);
    EXPECT_EQ(s->centipawns, -37);
    EXPECT_EQ(s->depth, 20);
    EXPECT_FALSE(s->mate);
    auto m = chess::parse_info_score("info depth 12 score mate -3 pv a1a2");
    ASSERT_TRUE(m);
    EXPECT_TRUE(m->mate);
    EXPECT_EQ(m->centipawns, -10000);
    EXPECT_FALSE(chess::parse_info_score("info depth 9 score cp 20 lowerbound pv e2e4"));
    EXPECT_FALSE(chess::parse_info_score("info depth 9 multipv 2 score cp 20 pv e2e4"));
    EXPECT_FALSE(chess::parse_info_score("info string NNUE enabled"));
    EXPECT_FALSE(chess::parse_info_score("bestmove e2e4"));
}

TEST(UciEngine, MissingBinaryIsUnavailable) {
    chess::EngineSettings s;
    s.command = {"/nonexistent/engine-binary"};
    EXPECT_THROW(chess::UciEngine{s}, EngineUnavailable);
}

class EngineGoldens : public ::testing::Test {
protected:
    void SetUp() override {
        auto cmd = testing_support::engine_command();
        if (cmd.empty()) GTEST_SKIP() << "no UCI engine configured";
        goldens_ = json::parse(read_file(fixture("engine_goldens.json")));
        chess::EngineSettings s;
        s.command = cmd;
        s.depth = goldens_.at("depth").get<int>();
        pool_ = std::make_unique<chess::EnginePool>(s, 2);
        for (auto& t : load_chess_games(fixture("games.pgn"), 0)) {
            prefixes_[t.task_id] = std::get<ChessMoveTask>(t.payload).san_moves;
        }
    }

    static int cp(double pawns) { return static_cast<int>(std::lround(pawns * 100)); }

    json goldens_;
    std::unique_ptr<chess::EnginePool> pool_;
    std::map<std::string, std::vector<std::string>> prefixes_;
};

TEST_F(EngineGoldens, MatchRecordedEvaluations) {
    for (const auto& [id, g] : goldens_.at("positions").items()) {
        const auto& prefix = prefixes_.at(id);
        std::vector<std::string> uci;
        chess::replay_san(prefix, &uci);
        auto before = pool_->evaluate(uci);
        EXPECT_EQ(cp(before.white_pawns), cp(g.at("before").get<double>())) << id;
        EXPECT_EQ(before.best_move, g.at("best_uci").get<std::string>()) << id;
        for (const auto& [san, pawns] : g.at("moves").items()) {
            auto ms = score_move_pawn_delta(prefix, san, *pool_);
            ASSERT_TRUE(ms.legal) << id << " " << san;
            ASSERT_TRUE(ms.pawns) << id << " " << san;
            EXPECT_EQ(cp(*ms.pawns), cp(pawns.get<double>())) << id << " " << san;
        }
    }
}

TEST_F(EngineGoldens, BlunderScoresBelowBestMove) {
    const auto& g = goldens_.at("positions").at("chess-1");
    const auto& prefix = prefixes_.at("chess-1");
    auto best = score_move_pawn_delta(prefix, "Nxd4", *pool_);
    auto blunder = score_move_pawn_delta(prefix, g.at("blunder").get<std::string>(), *pool_);
    ASSERT_TRUE(best.pawns && blunder.pawns);
    EXPECT_LT(*blunder.pawns, *best.pawns);
    EXPECT_EQ(best.uci, "b5d4");
}

TEST_F(EngineGoldens, IllegalMovePolicies) {
    const auto& g = goldens_.at("positions").at("chess-2");
    const auto& prefix = prefixes_.at("chess-2");
    const double before = g.at("before").get<double>();
    for (const auto& mv : g.at("illegal")) {
        const auto san = mv.get<std::string>();
        auto ex = score_move_pawn_delta(prefix, san, *pool_, IllegalMovePolicy::exclude);
        EXPECT_FALSE(ex.legal);
        EXPECT_FALSE(ex.pawns);
        auto pen = score_move_pawn_delta(prefix, san, *pool_, IllegalMovePolicy::before_minus_penalty, 3.0);
        ASSERT_TRUE(pen.pawns);
        EXPECT_EQ(cp(*pen.pawns), cp(before - 3.0)) << san;
    }
    auto worst = score_move_pawn_delta(prefix, "a4", *pool_, IllegalMovePolicy::worst_legal);
    ASSERT_TRUE(worst.pawns);
    EXPECT_LE(*worst.pawns, g.at("moves").at("h3").get<double>() + 1e-9);
}
