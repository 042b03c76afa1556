#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "debate/subprocess.hpp"

namespace debate::chess {

struct EngineSettings {
    std::vector<std::string> command;
    int depth = 20;
    int threads = 1;
    int hash_mb = 16;
    std::chrono::milliseconds timeout{300000};
};

struct EngineEval {
    /// Evaluation from White's point of view in pawns; mate scores map to ±100.
    double white_pawns = 0.0;
    bool mate = false;
    std::string best_move;  // UCI, empty when the side to move has no moves
    int depth = 0;
};

/// One engine process speaking UCI. Calls are serialized internally.
class UciEngine {
public:
    /// Starts the process and completes the uci/isready handshake.
    /// Throws EngineUnavailable.
    explicit UciEngine(EngineSettings settings);

    const std::string& name() const { return name_; }
    const EngineSettings& settings() const { return settings_; }

    /// Searches the position reached from the start position by `uci_moves`
    /// to the configured depth, starting from a cleared hash.
    EngineEval evaluate(const std::vector<std::string>& uci_moves);

private:
    std::string expect(const std::string& token);

    EngineSettings settings_;
    std::unique_ptr<Subprocess> proc_;
    std::string name_;
    std::mutex mu_;
};

/// Fixed set of engine processes scoring positions concurrently.
class EnginePool {
public:
    EnginePool(const EngineSettings& settings, int size);

    const std::string& engine_name() const { return engines_.front()->name(); }
    int depth() const { return engines_.front()->settings().depth; }
    EngineEval evaluate(const std::vector<std::string>& uci_moves);

private:
    std::vector<std::unique_ptr<UciEngine>> engines_;
    std::vector<bool> busy_;
    std::mutex mu_;
    std::condition_variable cv_;
};

/// Parses a UCI "info" line. Returns the side-to-move score in centipawns
/// (mate scores as ±10000) and the depth when the line carries an exact
/// first-PV score.
struct InfoScore {
    int centipawns = 0;
    bool mate = false;
    int depth = 0;
};
std::optional<InfoScore> parse_info_score(const std::string& line);

}  // namespace debate::chess
