#include "debate/tasks.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <regex>
#include <set>

#include "debate/chess.hpp"
#include "debate/csv.hpp"
#include "debate/errors.hpp"
#include "debate/http.hpp"

namespace debate {
namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"arithmetic", "gsm8k", "chess_move",
                                                        "biography", "mmlu", "chess_validity"};

std::optional<double> parse_plain_number(std::string s) {
    s = trim(s);
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '$'; }), s.end());
    while (!s.empty() && s.back() == '.') s.pop_back();
    static const std::regex re(R"(^-?\d+(\.\d+)?$)");
    if (!std::regex_match(s, re)) return std::nullopt;
    return std::stod(s);
}

bool valid_square(const std::string& s) { return chess::parse_square(s).has_value(); }

}  // namespace

std::string_view to_string(TaskKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

TaskKind parse_task_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<TaskKind>(i);
    }
    throw UnknownTaskKind("unknown task kind '" + std::string(name) + "'");
}

std::int64_t eval_expression(std::span<const std::int64_t, 6> o) {
    return o[0] + o[1] * o[2] + o[3] - o[4] * o[5];
}

std::string render_expression(std::span<const std::int64_t, 6> o) {
    return std::to_string(o[0]) + "+" + std::to_string(o[1]) + "*" + std::to_string(o[2]) + "+" +
           std::to_string(o[3]) + "-" + std::to_string(o[4]) + "*" + std::to_string(o[5]);
}

std::vector<TaskInstance> gen_arithmetic(int count, std::uint64_t seed, std::int64_t lo, std::int64_t hi) {
    if (count < 1) throw ConfigError("task.count: must be >= 1");
    if (hi < lo) throw ConfigError("task.range: empty range");
    SplitMix64 rng(mix_seed({seed, 0xA417ULL}));
    std::vector<TaskInstance> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        ArithmeticTask t;
        for (auto& v : t.operands) v = rng.uniform_int(lo, hi);
        t.answer = eval_expression(t.operands);
        std::set<std::int64_t> distinct(t.operands.begin(), t.operands.end());
        TaskInstance inst{"arithmetic-" + std::to_string(seed) + "-" + std::to_string(i), t, {}};
        if (distinct.size() != t.operands.size()) inst.metadata["duplicate_operands"] = "true";
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<std::size_t> sample_indices(std::size_t n, int count, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (count <= 0 || static_cast<std::size_t>(count) >= n) return idx;
    SplitMix64 rng(mix_seed({seed, 0x5A31ULL, n}));
    // partial Fisher-Yates
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
        auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<TaskInstance> load_gsm8k(const std::string& path, int count, std::uint64_t seed) {
    const std::string text = read_file(path);
    std::vector<TaskInstance> all;
    std::size_t lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        if (trim(raw).empty()) continue;
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw ParseError(path, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("question") || !j.contains("answer") || !j["question"].is_string() ||
            !j["answer"].is_string()) {
            throw ParseError(path, lineno, "expected string fields 'question' and 'answer'");
        }
        const std::string answer = j["answer"];
        auto delim = answer.rfind("####");
        if (delim == std::string::npos) throw ParseError(path, lineno, "answer has no '####' trailer");
        auto value = parse_plain_number(answer.substr(delim + 4));
        if (!value) throw ParseError(path, lineno, "answer trailer is not a number");
        all.push_back({"gsm8k-" + std::to_string(lineno), Gsm8kTask{j["question"], *value}, {}});
    }
    std::vector<TaskInstance> out;
    for (auto i : sample_indices(all.size(), count, seed)) out.push_back(all[i]);
    return out;
}

std::vector<TaskInstance> load_chess_games(const std::string& pgn_path, int count) {
    constexpr std::size_t kPrefix = 26;  // through Black's 13th move
    auto games = chess::parse_pgn(read_file(pgn_path), pgn_path);
    std::vector<TaskInstance> out;
    for (std::size_t g = 0; g < games.size(); ++g) {
        if (count > 0 && out.size() >= static_cast<std::size_t>(count)) break;
        const auto& game = games[g];
        if (game.tags.count("FEN")) {
            spdlog::warn("{}:{}: skipping game {} set up from a FEN position", pgn_path, game.line, g + 1);
            continue;
        }
        if (game.san_moves.size() < 2 * 14) {
            spdlog::warn("{}:{}: skipping game {} with only {} half-moves", pgn_path, game.line, g + 1,
                         game.san_moves.size());
            continue;
        }
        std::vector<std::string> prefix(game.san_moves.begin(), game.san_moves.begin() + kPrefix);
        try {
            chess::replay_san(prefix);
        } catch (const IllegalMove& e) {
            throw PgnParseError(pgn_path, game.line, e.what());
        }
        TaskInstance inst{"chess-" + std::to_string(g + 1), ChessMoveTask{std::move(prefix)}, {}};
        for (const char* tag : {"White", "Black", "Event", "Date"}) {
            if (auto it = game.tags.find(tag); it != game.tags.end()) inst.metadata[to_lower(tag)] = it->second;
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<TaskInstance> load_mmlu(const std::string& path, int count, std::uint64_t seed) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& e : fs::directory_iterator(path)) {
            if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.emplace_back(path);
    }
    if (files.empty()) throw ParseError(path + ": no .csv subject files");

    struct Subject {
        std::string name;
        std::vector<TaskInstance> rows;
    };
    std::vector<Subject> subjects;
    for (const auto& f : files) {
        std::string name = f.stem().string();
        for (std::string_view suffix : {"_test", "_val", "_dev"}) {
            if (name.size() > suffix.size() && name.ends_with(suffix)) name.resize(name.size() - suffix.size());
        }
        Subject s{name, {}};
        for (const auto& rec : csv::parse(read_file(f.string()), f.string())) {
            if (rec.fields.size() != 6) {
                throw ParseError(f.string(), rec.line, "expected 6 columns, got " + std::to_string(rec.fields.size()));
            }
            std::string ans = trim(rec.fields[5]);
            if (ans.size() != 1 || ans[0] < 'A' || ans[0] > 'D') {
                throw ParseError(f.string(), rec.line, "answer column must be one of A-D");
            }
            MmluTask t{name, rec.fields[0], {rec.fields[1], rec.fields[2], rec.fields[3], rec.fields[4]}, ans[0]};
            s.rows.push_back({"mmlu-" + name + "-" + std::to_string(rec.line), std::move(t), {{"subject", name}}});
        }
        subjects.push_back(std::move(s));
    }

    std::size_t total = 0;
    for (const auto& s : subjects) total += s.rows.size();
    const std::size_t want = count <= 0 ? total : std::min<std::size_t>(static_cast<std::size_t>(count), total);

    // round-robin over a seeded subject order until the quota is met
    auto order = sample_indices(subjects.size(), 0, seed);
    {
        SplitMix64 rng(mix_seed({seed, 0x11ULL}));
        for (std::size_t i = order.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
            std::swap(order[i - 1], order[j]);
        }
    }
    std::vector<std::size_t> quota(subjects.size(), 0);
    std::size_t assigned = 0;
    while (assigned < want) {
        bool progressed = false;
        for (auto s : order) {
            if (assigned == want) break;
            if (quota[s] < subjects[s].rows.size()) {
                ++quota[s];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) break;
    }

    std::vector<TaskInstance> out;
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        if (quota[s] == 0) continue;
        auto picks = sample_indices(subjects[s].rows.size(), static_cast<int>(quota[s]),
                                    mix_seed({seed, hash64(subjects[s].name)}));
        for (auto i : picks) out.push_back(subjects[s].rows[i]);
    }
    return out;
}

std::vector<TaskInstance> load_chess_validity(const std::string& path, int count) {
    const std::string text = read_file(path);
    std::vector<TaskInstance> out;
    auto add = [&](std::string moves, std::string square, const json& valid, std::size_t line) {
        if (!valid_square(square)) throw ParseError(path, line, "queried square '" + square + "' is not a square");
        if (!valid.is_array() || valid.empty()) throw ParseError(path, line, "valid destination set is empty");
        ChessValidityTask t{trim(moves), square, {}};
        for (const auto& v : valid) {
            if (!v.is_string() || !valid_square(v.get<std::string>())) {
                throw ParseError(path, line, "valid destination is not a square");
            }
            t.valid.push_back(v.get<std::string>());
        }
        out.push_back({"chess_validity-" + std::to_string(line), std::move(t), {}});
    };

    json whole = json::parse(text, nullptr, false);
    if (!whole.is_discarded() && whole.is_object() && whole.contains("examples")) {
        std::size_t idx = 0;
        for (const auto& ex : whole["examples"]) {
            ++idx;
            if (count > 0 && out.size() >= static_cast<std::size_t>(count)) break;
            std::string input = trim(ex.value("input", std::string{}));
            auto sp = input.find_last_of(' ');
            std::string square = sp == std::string::npos ? input : input.substr(sp + 1);
            std::string moves = sp == std::string::npos ? std::string{} : input.substr(0, sp);
            add(moves, square, ex.value("target", json::array()), idx);
        }
        return out;
    }
    std::size_t lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        if (trim(raw).empty()) continue;
        if (count > 0 && out.size() >= static_cast<std::size_t>(count)) break;
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw ParseError(path, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("moves") || !j.contains("square") || !j.contains("valid")) {
            throw ParseError(path, lineno, "expected fields 'moves', 'square', 'valid'");
        }
        add(j["moves"].get<std::string>(), j["square"].get<std::string>(), j["valid"], lineno);
    }
    return out;
}

std::vector<TaskInstance> load_biographies(const std::string& path) {
    const std::string text = read_file(path);
    std::set<std::string> seen_keys;
    std::string duplicate;
    json doc;
    try {
        doc = json::parse(text, [&](int depth, json::parse_event_t event, json& parsed) {
            if (event == json::parse_event_t::key && depth == 1) {
                auto key = parsed.get<std::string>();
                if (!seen_keys.insert(key).second && duplicate.empty()) duplicate = key;
            }
            return true;
        });
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    std::vector<std::pair<std::string, json>> entries;
    if (doc.is_object()) {
        if (!duplicate.empty()) throw ParseError(path + ": duplicate person '" + duplicate + "'");
        for (auto it = doc.begin(); it != doc.end(); ++it) entries.emplace_back(it.key(), it.value());
    } else if (doc.is_array()) {
        std::set<std::string> names;
        for (const auto& e : doc) {
            if (!e.is_object() || !e.contains("person") || !e.contains("facts")) {
                throw ParseError(path + ": entries need 'person' and 'facts'");
            }
            auto name = e["person"].get<std::string>();
            if (!names.insert(name).second) throw ParseError(path + ": duplicate person '" + name + "'");
            entries.emplace_back(name, e["facts"]);
        }
    } else {
        throw ParseError(path + ": expected a JSON object or array");
    }

    std::vector<TaskInstance> out;
    for (auto& [name, facts_json] : entries) {
        std::vector<std::string> facts;
        if (facts_json.is_string()) {
            for (auto& line : split_lines(facts_json.get<std::string>())) {
                if (!trim(line).empty()) facts.push_back(line);
            }
        } else if (facts_json.is_array()) {
            for (const auto& f : facts_json) facts.push_back(f.get<std::string>());
        } else {
            throw ParseError(path + ": facts for '" + name + "' must be a list or text");
        }
        if (facts.empty()) throw ParseError(path + ": person '" + name + "' has no facts");
        std::string slug;
        for (char c : name) slug.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_');
        out.push_back({"biography-" + slug, BiographyTask{name, std::move(facts)}, {}});
    }
    return out;
}

void fetch_dataset(const std::string& url, const std::string& dest) { http::download(url, dest); }

// --- serialization ---

void to_json(json& j, const TaskInstance& t) {
    j = json{{"task_id", t.task_id}, {"kind", to_string(t.kind())}};
    if (!t.metadata.empty()) j["metadata"] = t.metadata;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ArithmeticTask>) {
                j["operands"] = p.operands;
                j["answer"] = p.answer;
            } else if constexpr (std::is_same_v<T, Gsm8kTask>) {
                j["question"] = p.question;
                j["answer"] = p.answer;
            } else if constexpr (std::is_same_v<T, ChessMoveTask>) {
                j["san_moves"] = p.san_moves;
            } else if constexpr (std::is_same_v<T, BiographyTask>) {
                j["person"] = p.person;
                j["facts"] = p.facts;
            } else if constexpr (std::is_same_v<T, MmluTask>) {
                j["subject"] = p.subject;
                j["question"] = p.question;
                j["options"] = p.options;
                j["answer"] = std::string(1, p.answer);
            } else if constexpr (std::is_same_v<T, ChessValidityTask>) {
                j["moves"] = p.moves;
                j["square"] = p.square;
                j["valid"] = p.valid;
            }
        },
        t.payload);
}

void from_json(const json& j, TaskInstance& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.metadata = j.value("metadata", std::map<std::string, std::string>{});
    switch (parse_task_kind(j.at("kind").get<std::string>())) {
        case TaskKind::arithmetic:
            t.payload = ArithmeticTask{j.at("operands").get<std::array<std::int64_t, 6>>(), j.at("answer").get<std::int64_t>()};
            break;
        case TaskKind::gsm8k:
            t.payload = Gsm8kTask{j.at("question").get<std::string>(), j.at("answer").get<double>()};
            break;
        case TaskKind::chess_move:
            t.payload = ChessMoveTask{j.at("san_moves").get<std::vector<std::string>>()};
            break;
        case TaskKind::biography:
            t.payload = BiographyTask{j.at("person").get<std::string>(), j.at("facts").get<std::vector<std::string>>()};
            break;
        case TaskKind::mmlu: {
            auto ans = j.at("answer").get<std::string>();
            t.payload = MmluTask{j.value("subject", std::string{}), j.at("question").get<std::string>(),
                                 j.at("options").get<std::array<std::string, 4>>(), ans.empty() ? 'A' : ans[0]};
            break;
        }
        case TaskKind::chess_validity:
            t.payload = ChessValidityTask{j.at("moves").get<std::string>(), j.at("square").get<std::string>(),
                                          j.at("valid").get<std::vector<std::string>>()};
            break;
    }
}

}  // namespace debate
