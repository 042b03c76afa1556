#include "debate/debate.h"

#include <spdlog/spdlog.h>

#include <cstring>
#include <sstream>
#include <string>

#include "debate/chess.hpp"
#include "debate/errors.hpp"
#include "debate/extract.hpp"
#include "debate/runner.hpp"

struct dbk_experiment {
    debate::ExperimentSpec spec;
    std::string spec_text;
};

struct dbk_result {
    debate::json body;
    std::string text;
    debate::Aggregate aggregate;
    bool has_aggregate = false;
};

namespace {

thread_local std::string g_last_error;

dbk_status fail(dbk_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

template <typename Fn>
dbk_status guarded(Fn fn) {
    try {
        g_last_error.clear();
        return fn();
    } catch (const debate::ConfigError& e) {
        return fail(DBK_ERR_CONFIG, e.what());
    } catch (const debate::UnknownTaskKind& e) {
        return fail(DBK_ERR_CONFIG, e.what());
    } catch (const debate::ParseError& e) {
        return fail(DBK_ERR_PARSE, e.what());
    } catch (const debate::BackendError& e) {
        return fail(DBK_ERR_BACKEND, e.what());
    } catch (const debate::EngineUnavailable& e) {
        return fail(DBK_ERR_ENGINE, e.what());
    } catch (const debate::IoError& e) {
        return fail(DBK_ERR_IO, e.what());
    } catch (const debate::IllegalMove& e) {
        return fail(DBK_ERR_ILLEGAL_MOVE, e.what());
    } catch (const debate::json::exception& e) {
        return fail(DBK_ERR_PARSE, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(DBK_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(DBK_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(DBK_ERR_INTERNAL, "unknown error");
    }
}

dbk_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) return fail(DBK_ERR_BUFFER_TOO_SMALL, "output buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return DBK_OK;
}

dbk_result* make_result(debate::json body) {
    auto* r = new dbk_result;
    r->body = std::move(body);
    r->text = r->body.dump(2);
    return r;
}

}  // namespace

extern "C" {

const char* dbk_version(void) { return "1.0.0"; }

const char* dbk_status_string(dbk_status status) {
    switch (status) {
        case DBK_OK: return "ok";
        case DBK_ERR_INVALID_ARGUMENT: return "invalid argument";
        case DBK_ERR_CONFIG: return "configuration error";
        case DBK_ERR_PARSE: return "parse error";
        case DBK_ERR_BACKEND: return "backend error";
        case DBK_ERR_ENGINE: return "engine unavailable";
        case DBK_ERR_IO: return "I/O error";
        case DBK_ERR_ILLEGAL_MOVE: return "illegal move";
        case DBK_ERR_BUFFER_TOO_SMALL: return "buffer too small";
        case DBK_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* dbk_last_error(void) { return g_last_error.c_str(); }

dbk_status dbk_set_log_level(const char* level) {
    if (!level) return fail(DBK_ERR_INVALID_ARGUMENT, "level is NULL");
    return guarded([&] {
        auto lvl = spdlog::level::from_str(level);
        if (lvl == spdlog::level::off && std::string(level) != "off") {
            return fail(DBK_ERR_INVALID_ARGUMENT, std::string("unknown log level '") + level + "'");
        }
        spdlog::set_level(lvl);
        return DBK_OK;
    });
}

dbk_status dbk_experiment_from_json(const char* spec_json, const char* base_dir, dbk_experiment** out) {
    if (!spec_json || !out) return fail(DBK_ERR_INVALID_ARGUMENT, "spec_json and out must not be NULL");
    *out = nullptr;
    return guarded([&] {
        auto spec = debate::ExperimentSpec::from_json(debate::json::parse(spec_json), base_dir ? base_dir : ".");
        *out = new dbk_experiment{std::move(spec), {}};
        return DBK_OK;
    });
}

dbk_status dbk_experiment_load(const char* path, dbk_experiment** out) {
    if (!path || !out) return fail(DBK_ERR_INVALID_ARGUMENT, "path and out must not be NULL");
    *out = nullptr;
    return guarded([&] {
        *out = new dbk_experiment{debate::ExperimentSpec::load(path), {}};
        return DBK_OK;
    });
}

void dbk_experiment_free(dbk_experiment* exp) { delete exp; }

dbk_status dbk_experiment_set_output_dir(dbk_experiment* exp, const char* dir) {
    if (!exp || !dir || !*dir) return fail(DBK_ERR_INVALID_ARGUMENT, "experiment and dir must be set");
    exp->spec.output_dir = dir;
    return guarded([&] { return DBK_OK; });
}

dbk_status dbk_experiment_set_resume(dbk_experiment* exp, int resume) {
    if (!exp) return fail(DBK_ERR_INVALID_ARGUMENT, "experiment is NULL");
    exp->spec.resume = resume != 0;
    return guarded([&] { return DBK_OK; });
}

dbk_status dbk_experiment_set_parallelism(dbk_experiment* exp, int parallelism) {
    if (!exp) return fail(DBK_ERR_INVALID_ARGUMENT, "experiment is NULL");
    if (parallelism < 1) return fail(DBK_ERR_CONFIG, "parallelism must be >= 1");
    exp->spec.parallelism = parallelism;
    return guarded([&] { return DBK_OK; });
}

const char* dbk_experiment_spec_json(dbk_experiment* exp) {
    if (!exp) return "";
    exp->spec_text = exp->spec.to_json().dump(2);
    return exp->spec_text.c_str();
}

dbk_status dbk_run(dbk_experiment* exp, dbk_result** out) {
    if (!exp || !out) return fail(DBK_ERR_INVALID_ARGUMENT, "experiment and out must not be NULL");
    *out = nullptr;
    return guarded([&] {
        auto o = debate::run_experiment(exp->spec);
        debate::json body{{"result", o.result},
                          {"results_path", o.results_path},
                          {"transcripts_path", o.transcripts_path},
                          {"reused", o.reused}};
        if (o.report) {
            body["report"] = {{"summary_csv", o.report->summary_csv},
                              {"instances_csv", o.report->instances_csv},
                              {"consensus_csv", o.report->consensus_csv},
                              {"summary_json", o.report->summary_json}};
        }
        *out = make_result(std::move(body));
        (*out)->aggregate = o.result.aggregate;
        (*out)->has_aggregate = true;
        return DBK_OK;
    });
}

dbk_status dbk_sweep(dbk_experiment* exp, dbk_result** out) {
    if (!exp || !out) return fail(DBK_ERR_INVALID_ARGUMENT, "experiment and out must not be NULL");
    *out = nullptr;
    return guarded([&] {
        debate::ReportFiles files;
        auto table = debate::run_sweep_experiment(exp->spec, &files);
        debate::json points = debate::json::array();
        for (const auto& p : table.points) {
            debate::json cons = debate::json::array();
            for (const auto& c : p.consensus) cons.push_back(c ? debate::json(*c) : debate::json(nullptr));
            points.push_back({{"value", p.label}, {"aggregate", p.result.aggregate}, {"consensus", cons}});
        }
        *out = make_result({{"axis", debate::to_string(table.axis)},
                            {"points", points},
                            {"report",
                             {{"summary_csv", files.summary_csv},
                              {"instances_csv", files.instances_csv},
                              {"consensus_csv", files.consensus_csv},
                              {"summary_json", files.summary_json}}}});
        return DBK_OK;
    });
}

dbk_status dbk_score(dbk_experiment* exp, const char* transcripts_path, dbk_result** out) {
    if (!exp || !transcripts_path || !out) return fail(DBK_ERR_INVALID_ARGUMENT, "arguments must not be NULL");
    *out = nullptr;
    return guarded([&] {
        auto r = debate::score_transcript_file(exp->spec, transcripts_path);
        *out = make_result({{"result", r}});
        (*out)->aggregate = r.aggregate;
        (*out)->has_aggregate = true;
        return DBK_OK;
    });
}

dbk_status dbk_report(const char* const* results_paths, size_t count, const char* out_dir, dbk_result** out) {
    if (!results_paths || count == 0 || !out_dir || !out) {
        return fail(DBK_ERR_INVALID_ARGUMENT, "report needs at least one results file and an output directory");
    }
    *out = nullptr;
    return guarded([&] {
        std::vector<std::string> paths;
        for (size_t i = 0; i < count; ++i) {
            if (!results_paths[i]) return fail(DBK_ERR_INVALID_ARGUMENT, "results path is NULL");
            paths.emplace_back(results_paths[i]);
        }
        auto files = debate::report_from_results(paths, out_dir);
        *out = make_result({{"summary_csv", files.summary_csv},
                            {"instances_csv", files.instances_csv},
                            {"consensus_csv", files.consensus_csv},
                            {"summary_json", files.summary_json}});
        return DBK_OK;
    });
}

const char* dbk_result_json(const dbk_result* result) { return result ? result->text.c_str() : ""; }

dbk_status dbk_result_aggregate(const dbk_result* result, double* mean, double* se, int* n) {
    if (!result) return fail(DBK_ERR_INVALID_ARGUMENT, "result is NULL");
    if (!result->has_aggregate) return fail(DBK_ERR_INVALID_ARGUMENT, "result has no aggregate");
    if (mean) *mean = result->aggregate.mean;
    if (se) *se = result->aggregate.se;
    if (n) *n = result->aggregate.n;
    g_last_error.clear();
    return DBK_OK;
}

void dbk_result_free(dbk_result* result) { delete result; }

dbk_status dbk_fetch(const char* url, const char* dest) {
    if (!url || !dest) return fail(DBK_ERR_INVALID_ARGUMENT, "url and dest must not be NULL");
    return guarded([&] {
        debate::fetch_dataset(url, dest);
        return DBK_OK;
    });
}

dbk_status dbk_extract(const char* task_kind, const char* text, char* buf, size_t cap, size_t* needed) {
    if (!task_kind || !text) return fail(DBK_ERR_INVALID_ARGUMENT, "task_kind and text must not be NULL");
    return guarded([&] {
        auto a = debate::extract_answer(debate::parse_task_kind(task_kind), text);
        return copy_out(a ? debate::json(*a).dump() : std::string("null"), buf, cap, needed);
    });
}

dbk_status dbk_eval_expression(const int64_t operands[6], int64_t* out) {
    if (!operands || !out) return fail(DBK_ERR_INVALID_ARGUMENT, "operands and out must not be NULL");
    std::array<std::int64_t, 6> ops{};
    for (int i = 0; i < 6; ++i) ops[static_cast<std::size_t>(i)] = operands[i];
    *out = debate::eval_expression(ops);
    g_last_error.clear();
    return DBK_OK;
}

dbk_status dbk_perft(const char* fen, int depth, uint64_t* out) {
    if (!out || depth < 0) return fail(DBK_ERR_INVALID_ARGUMENT, "out must be set and depth >= 0");
    return guarded([&] {
        auto pos = (fen && *fen) ? debate::chess::Position::from_fen(fen) : debate::chess::Position::startpos();
        *out = debate::chess::perft(pos, depth);
        return DBK_OK;
    });
}

dbk_status dbk_check_move(const char* san_prefix, const char* move, int* legal, char* uci_buf, size_t cap) {
    if (!san_prefix || !move || !legal) return fail(DBK_ERR_INVALID_ARGUMENT, "arguments must not be NULL");
    return guarded([&] {
        std::vector<std::string> prefix;
        std::istringstream ss(san_prefix);
        std::string tok;
        while (ss >> tok) prefix.push_back(tok);
        auto res = debate::chess::check_move_legality(prefix, move);
        *legal = res.legal ? 1 : 0;
        if (uci_buf && cap > 0) return copy_out(res.uci, uci_buf, cap, nullptr);
        return DBK_OK;
    });
}

}  // extern "C"
