#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "debate/util.hpp"

namespace debate {

enum class TaskKind { arithmetic, gsm8k, chess_move, biography, mmlu, chess_validity };

std::string_view to_string(TaskKind kind);
/// Throws UnknownTaskKind.
TaskKind parse_task_kind(std::string_view name);

struct ArithmeticTask {
    std::array<std::int64_t, 6> operands{};
    std::int64_t answer = 0;
};

struct Gsm8kTask {
    std::string question;
    double answer = 0.0;
};

/// Game prefix through Black's 13th move; White plays move 14. Scored by a
/// chess engine, so there is no stored ground truth.
struct ChessMoveTask {
    std::vector<std::string> san_moves;
};

struct BiographyTask {
    std::string person;
    std::vector<std::string> facts;
};

struct MmluTask {
    std::string subject;
    std::string question;
    std::array<std::string, 4> options;
    char answer = 'A';
};

/// BIG-bench chess state tracking: UCI move list, the square of the piece to
/// move, and every valid destination.
struct ChessValidityTask {
    std::string moves;
    std::string square;
    std::vector<std::string> valid;
};

using TaskPayload = std::variant<ArithmeticTask, Gsm8kTask, ChessMoveTask, BiographyTask, MmluTask, ChessValidityTask>;

struct TaskInstance {
    std::string task_id;
    TaskPayload payload;
    std::map<std::string, std::string> metadata;

    TaskKind kind() const { return static_cast<TaskKind>(payload.index()); }
};

void to_json(json& j, const TaskInstance& t);
void from_json(const json& j, TaskInstance& t);

/// a + b*c + d - e*f with standard precedence.
std::int64_t eval_expression(std::span<const std::int64_t, 6> operands);
/// "12+15*21+0-3*27"
std::string render_expression(std::span<const std::int64_t, 6> operands);

/// Six operands drawn uniformly from [lo, hi] per instance. Duplicate operands
/// are allowed and flagged in metadata["duplicate_operands"].
std::vector<TaskInstance> gen_arithmetic(int count, std::uint64_t seed, std::int64_t lo = 0, std::int64_t hi = 30);

/// GSM8K line-delimited JSON with "question" and "answer"; the numeric answer
/// follows the "####" delimiter. `count` <= 0 loads everything.
std::vector<TaskInstance> load_gsm8k(const std::string& path, int count, std::uint64_t seed);

/// Games with at least 14 full moves, as the SAN prefix through Black's 13th
/// move. Shorter games and games from a set-up position are skipped.
std::vector<TaskInstance> load_chess_games(const std::string& pgn_path, int count);

/// `path` is a directory of per-subject CSV files (question, A, B, C, D,
/// answer) or a single such file. Sampling is stratified across subjects.
std::vector<TaskInstance> load_mmlu(const std::string& path, int count, std::uint64_t seed);

/// Line-delimited {"moves", "square", "valid"} records, or a BIG-bench
/// task.json whose inputs end with the queried square.
std::vector<TaskInstance> load_chess_validity(const std::string& path, int count);

/// JSON array of {"person", "facts"} objects, or an object mapping each
/// person to a list of facts (or to newline-separated fact text).
std::vector<TaskInstance> load_biographies(const std::string& path);

/// Deterministic subset of [0, n): `count` indices chosen by seed, returned in
/// ascending order. count <= 0 or count >= n selects everything.
std::vector<std::size_t> sample_indices(std::size_t n, int count, std::uint64_t seed);

/// Downloads `url` to `dest` following redirects. Throws Error.
void fetch_dataset(const std::string& url, const std::string& dest);

}  // namespace debate
