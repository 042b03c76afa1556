#include "debate/uci_engine.hpp"

#include <sstream>

#include "debate/errors.hpp"

namespace debate::chess {

std::optional<InfoScore> parse_info_score(const std::string& line) {
    std::istringstream in(line);
    std::string tok;
    if (!(in >> tok) || tok != "info") return std::nullopt;
    InfoScore s;
    bool have_score = false;
    while (in >> tok) {
        if (tok == "depth") {
            in >> s.depth;
        } else if (tok == "multipv") {
            int k = 1;
            in >> k;
            if (k != 1) return std::nullopt;
        } else if (tok == "score") {
            std::string kind;
            int v = 0;
            in >> kind >> v;
            if (kind == "cp") {
                s.centipawns = v;
            } else if (kind == "mate") {
                s.mate = true;
                s.centipawns = v > 0 ? 10000 : -10000;
            } else {
                return std::nullopt;
            }
            have_score = true;
        } else if (tok == "lowerbound" || tok == "upperbound") {
            return std::nullopt;
        } else if (tok == "pv" || tok == "string") {
            break;
        }
    }
    if (!have_score) return std::nullopt;
    return s;
}

UciEngine::UciEngine(EngineSettings settings) : settings_(std::move(settings)) {
    if (settings_.command.empty()) throw EngineUnavailable("no UCI engine command configured");
    try {
        proc_ = std::make_unique<Subprocess>(settings_.command);
        proc_->write_line("uci");
        for (;;) {
            auto line = proc_->read_line(std::chrono::seconds(30));
            if (!line) throw EngineUnavailable("engine did not answer 'uci'");
            if (line->rfind("id name ", 0) == 0) name_ = line->substr(8);
            if (*line == "uciok") break;
        }
        proc_->write_line("setoption name Threads value " + std::to_string(settings_.threads));
        proc_->write_line("setoption name Hash value " + std::to_string(settings_.hash_mb));
        expect("readyok");
    } catch (const EngineUnavailable&) {
        throw;
    } catch (const std::exception& e) {
        throw EngineUnavailable(std::string("cannot start UCI engine: ") + e.what());
    }
    if (name_.empty()) name_ = settings_.command.back();
}

std::string UciEngine::expect(const std::string& token) {
    if (token == "readyok") proc_->write_line("isready");
    for (;;) {
        auto line = proc_->read_line(std::chrono::seconds(60));
        if (!line) throw EngineUnavailable("engine stopped responding waiting for " + token);
        if (line->rfind(token, 0) == 0) return *line;
    }
}

EngineEval UciEngine::evaluate(const std::vector<std::string>& uci_moves) {
    std::lock_guard lock(mu_);
    proc_->write_line("ucinewgame");
    expect("readyok");
    std::string pos = "position startpos";
    if (!uci_moves.empty()) {
        pos += " moves";
        for (const auto& m : uci_moves) pos += " " + m;
    }
    proc_->write_line(pos);
    proc_->write_line("go depth " + std::to_string(settings_.depth));

    std::optional<InfoScore> last;
    EngineEval out;
    for (;;) {
        auto line = proc_->read_line(settings_.timeout);
        if (!line) throw EngineUnavailable("engine search timed out or exited");
        if (auto s = parse_info_score(*line)) {
            last = s;
            continue;
        }
        if (line->rfind("bestmove", 0) == 0) {
            std::istringstream in(*line);
            std::string kw, mv;
            in >> kw >> mv;
            if (mv != "(none)") out.best_move = mv;
            break;
        }
    }
    if (!last) throw EngineUnavailable("engine returned no score");
    // scores are reported for the side to move
    const bool white_to_move = uci_moves.size() % 2 == 0;
    const double stm_pawns = last->mate ? (last->centipawns > 0 ? 100.0 : -100.0) : last->centipawns / 100.0;
    out.white_pawns = white_to_move ? stm_pawns : -stm_pawns;
    out.mate = last->mate;
    out.depth = last->depth;
    return out;
}

EnginePool::EnginePool(const EngineSettings& settings, int size) {
    if (size < 1) size = 1;
    for (int i = 0; i < size; ++i) engines_.push_back(std::make_unique<UciEngine>(settings));
    busy_.assign(engines_.size(), false);
}

EngineEval EnginePool::evaluate(const std::vector<std::string>& uci_moves) {
    std::size_t slot = 0;
    {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] {
            for (std::size_t i = 0; i < busy_.size(); ++i) {
                if (!busy_[i]) {
                    slot = i;
                    return true;
                }
            }
            return false;
        });
        busy_[slot] = true;
    }
    struct Release {
        EnginePool* pool;
        std::size_t slot;
        ~Release() {
            {
                std::lock_guard lock(pool->mu_);
                pool->busy_[slot] = false;
            }
            pool->cv_.notify_one();
        }
    } release{this, slot};
    return engines_[slot]->evaluate(uci_moves);
}

}  // namespace debate::chess
