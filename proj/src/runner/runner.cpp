#include "debate/runner.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "debate/errors.hpp"
#include "debate/prompts.hpp"

namespace fs = std::filesystem;

namespace debate {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::single: return "single";
        case Method::reflection: return "reflection";
        case Method::majority: return "majority";
        case Method::debate: return "debate";
    }
    return "debate";
}

Method parse_method(std::string_view s) {
    if (s == "single") return Method::single;
    if (s == "reflection") return Method::reflection;
    if (s == "majority") return Method::majority;
    if (s == "debate") return Method::debate;
    throw ConfigError("method must be single, reflection, majority or debate, got '" + std::string(s) + "'");
}

namespace {

std::vector<std::string> engine_command_from_env() {
    std::vector<std::string> out;
    if (const char* env = std::getenv("DEBATE_UCI_ENGINE")) {
        std::stringstream ss(env);
        std::string part;
        while (std::getline(ss, part, ';')) {
            if (!part.empty()) out.push_back(part);
        }
    }
    return out;
}

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).lexically_normal().string();
}

template <typename T>
T field(const json& j, const char* name, const std::string& where, T fallback) {
    if (!j.contains(name)) return fallback;
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + name + " has the wrong type");
    }
}

/// The debate configuration actually run for each method.
DebateConfig effective_config(const ExperimentSpec& spec) {
    DebateConfig c = spec.debate;
    switch (spec.method) {
        case Method::single:
            c = spec.debate.with_agents(1);
            c.num_rounds = 0;
            c.summarize_others = false;
            break;
        case Method::reflection:
            c = spec.debate.with_agents(1);
            c.summarize_others = false;
            c.num_rounds = spec.reflection_rounds;
            break;
        default: break;
    }
    return c;
}

std::unique_ptr<chess::EnginePool> make_engine(const ScoringSpec& s, TaskKind kind) {
    if (kind != TaskKind::chess_move || !s.engine) return nullptr;
    chess::EngineSettings es;
    es.command = s.engine->command.empty() ? engine_command_from_env() : s.engine->command;
    if (es.command.empty()) throw EngineUnavailable("scoring.engine.command is empty and DEBATE_UCI_ENGINE is unset");
    es.depth = s.engine->depth;
    return std::make_unique<chess::EnginePool>(es, s.engine->pool);
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
    ExperimentSpec s;
    if (!j.contains("task") || !j.at("task").is_object()) throw ConfigError("task is required");
    const auto& t = j.at("task");
    if (!t.contains("kind")) throw ConfigError("task.kind is required");
    try {
        s.task.kind = parse_task_kind(field<std::string>(t, "kind", "task", ""));
    } catch (const UnknownTaskKind& e) {
        throw ConfigError(std::string("task.kind: ") + e.what());
    }
    s.task.path = resolve(base_dir, field<std::string>(t, "path", "task", ""));
    s.task.count = field<int>(t, "count", "task", 100);
    s.task.seed = field<std::uint64_t>(t, "seed", "task", 0);
    if (t.contains("range")) {
        auto r = field<std::vector<std::int64_t>>(t, "range", "task", {});
        if (r.size() != 2) throw ConfigError("task.range must be [lo, hi]");
        s.task.range_lo = r[0];
        s.task.range_hi = r[1];
    }
    s.method = parse_method(field<std::string>(j, "method", "", "debate"));
    if (j.contains("debate")) {
        if (!j.at("debate").is_object()) throw ConfigError("debate must be an object");
        s.debate = j.at("debate").get<DebateConfig>();
    }
    s.reflection_rounds = field<int>(j, "reflection_rounds", "", 1);
    if (!j.contains("backends")) throw ConfigError("backends is required");
    s.backends = j.at("backends");
    if (s.backends.is_object()) {
        for (auto& [id, b] : s.backends.items()) {
            if (b.is_object() && b.contains("cache") && b.at("cache").is_string()) {
                b["cache"] = resolve(base_dir, b.at("cache").get<std::string>());
            }
        }
    }
    if (j.contains("scoring")) {
        const auto& sc = j.at("scoring");
        s.scoring.judge_backend_id = field<std::string>(sc, "judge_backend_id", "scoring", "");
        if (sc.contains("engine")) {
            const auto& e = sc.at("engine");
            EngineSpec es;
            if (e.contains("command")) {
                if (e.at("command").is_string()) {
                    std::stringstream ss(e.at("command").get<std::string>());
                    std::string part;
                    while (ss >> part) es.command.push_back(part);
                } else {
                    es.command = field<std::vector<std::string>>(e, "command", "scoring.engine", {});
                }
            }
            es.depth = field<int>(e, "depth", "scoring.engine", 20);
            es.pool = field<int>(e, "pool", "scoring.engine", 1);
            s.scoring.engine = es;
        }
        s.scoring.illegal_move_policy =
            parse_illegal_move_policy(field<std::string>(sc, "illegal_move_policy", "scoring", "exclude"));
        s.scoring.illegal_move_penalty = field<double>(sc, "illegal_move_penalty", "scoring", 0.0);
    }
    s.output_dir = resolve(base_dir, field<std::string>(j, "output_dir", "", "runs/out"));
    s.resume = field<bool>(j, "resume", "", false);
    s.parallelism = field<int>(j, "parallelism", "", 1);
    if (j.contains("deterministic_clock") && !j.at("deterministic_clock").is_null()) {
        s.deterministic_clock = field<bool>(j, "deterministic_clock", "", true);
    }
    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        SweepSpec sp;
        sp.axis = parse_sweep_axis(field<std::string>(sw, "axis", "sweep", ""));
        if (!sw.contains("values") || !sw.at("values").is_array()) throw ConfigError("sweep.values must be an array");
        for (const auto& v : sw.at("values")) sp.values.push_back(v);
        sp.summarize_threshold = field<int>(sw, "summarize_threshold", "sweep", 0);
        s.sweep = sp;
    }
    s.validate();
    return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(j, fs::path(path).parent_path().string());
}

json ExperimentSpec::to_json() const {
    json t{{"kind", debate::to_string(task.kind)},
           {"path", task.path},
           {"count", task.count},
           {"seed", task.seed},
           {"range", {task.range_lo, task.range_hi}}};
    json sc{{"judge_backend_id", scoring.judge_backend_id},
            {"illegal_move_policy", debate::to_string(scoring.illegal_move_policy)},
            {"illegal_move_penalty", scoring.illegal_move_penalty}};
    if (scoring.engine) {
        sc["engine"] = {{"command", scoring.engine->command}, {"depth", scoring.engine->depth},
                        {"pool", scoring.engine->pool}};
    }
    json j{{"task", t},
           {"method", debate::to_string(method)},
           {"debate", debate},
           {"reflection_rounds", reflection_rounds},
           {"backends", backends},
           {"scoring", sc},
           {"output_dir", output_dir},
           {"resume", resume},
           {"parallelism", parallelism},
           {"deterministic_clock", deterministic_clock ? json(*deterministic_clock) : json(nullptr)}};
    for (auto& [id, b] : j["backends"].items()) {
        b.erase("api_key");
    }
    if (sweep) {
        j["sweep"] = {{"axis", debate::to_string(sweep->axis)},
                      {"values", sweep->values},
                      {"summarize_threshold", sweep->summarize_threshold}};
    }
    return j;
}

bool ExperimentSpec::all_scripted() const {
    for (const auto& [id, b] : backends.items()) {
        if (!b.is_object() || b.value("kind", std::string()) != "scripted") return false;
    }
    return true;
}

void ExperimentSpec::validate() const {
    if (task.kind == TaskKind::arithmetic) {
        if (task.count < 1) throw ConfigError("task.count must be >= 1");
        if (task.range_lo > task.range_hi) throw ConfigError("task.range must satisfy lo <= hi");
    } else if (task.path.empty()) {
        throw ConfigError("task.path is required for task kind " + std::string(debate::to_string(task.kind)));
    }
    if (!backends.is_object() || backends.empty()) throw ConfigError("backends must be a non-empty object");
    for (const auto& [id, b] : backends.items()) {
        if (!b.is_object() || !b.contains("kind")) throw ConfigError("backends." + id + ".kind is required");
        if (b.contains("api_key")) {
            throw ConfigError("backends." + id + ".api_key is not allowed; name an environment variable in auth_env");
        }
    }
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (reflection_rounds < 0) throw ConfigError("reflection_rounds must be >= 0");
    switch (method) {
        case Method::majority:
            if (debate.num_agents < 2) throw ConfigError("debate.num_agents must be >= 2 for method majority");
            if (debate.num_rounds != 0) throw ConfigError("debate.num_rounds must be 0 for method majority");
            break;
        case Method::reflection:
            if (debate.num_agents != 1) throw ConfigError("debate.num_agents must be 1 for method reflection");
            if (reflection_rounds < 1) throw ConfigError("reflection_rounds must be >= 1 for method reflection");
            break;
        default: break;
    }
    if (sweep && method != Method::debate) throw ConfigError("sweep requires method debate");
    DebateConfig eff = effective_config(*this);
    if (method == Method::reflection) eff.num_rounds = 0;
    eff.validate();
    for (const auto& id : debate.backend_ids) {
        if (!backends.contains(id)) throw ConfigError("debate.backend_ids: unknown backend '" + id + "'");
    }
    if (!debate.summarizer_backend_id.empty() && !backends.contains(debate.summarizer_backend_id)) {
        throw ConfigError("debate.summarizer_backend_id: unknown backend '" + debate.summarizer_backend_id + "'");
    }
    if (!scoring.judge_backend_id.empty() && !backends.contains(scoring.judge_backend_id)) {
        throw ConfigError("scoring.judge_backend_id: unknown backend '" + scoring.judge_backend_id + "'");
    }
    if (scoring.engine) {
        if (scoring.engine->depth < 1) throw ConfigError("scoring.engine.depth must be >= 1");
        if (scoring.engine->pool < 1) throw ConfigError("scoring.engine.pool must be >= 1");
    }
}

std::vector<TaskInstance> load_tasks(const TaskSource& s) {
    switch (s.kind) {
        case TaskKind::arithmetic: return gen_arithmetic(s.count, s.seed, s.range_lo, s.range_hi);
        case TaskKind::gsm8k: return load_gsm8k(s.path, s.count, s.seed);
        case TaskKind::chess_move: return load_chess_games(s.path, s.count);
        case TaskKind::mmlu: return load_mmlu(s.path, s.count, s.seed);
        case TaskKind::chess_validity: return load_chess_validity(s.path, s.count);
        case TaskKind::biography: {
            auto all = load_biographies(s.path);
            std::vector<TaskInstance> out;
            for (auto i : sample_indices(all.size(), s.count, s.seed)) out.push_back(std::move(all[i]));
            return out;
        }
    }
    return {};
}

OrderedAppender::OrderedAppender(const std::string& path, std::size_t first_index)
    : out_(path, std::ios::app), next_(first_index) {
    if (!out_) throw IoError("cannot open " + path + " for appending");
}

void OrderedAppender::submit(std::size_t index, std::string line) {
    std::lock_guard lock(mu_);
    pending_[index] = std::move(line);
    drain();
}

void OrderedAppender::skip(std::size_t index) {
    std::lock_guard lock(mu_);
    pending_[index] = std::nullopt;
    drain();
}

void OrderedAppender::drain() {
    for (auto it = pending_.find(next_); it != pending_.end(); it = pending_.find(next_)) {
        if (it->second) out_ << *it->second << '\n';
        pending_.erase(it);
        ++next_;
    }
    out_.flush();
}

std::vector<Transcript> read_transcripts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transcripts file " + path);
    std::vector<Transcript> out;
    std::map<std::string, std::size_t> where;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        Transcript t;
        try {
            t = json::parse(line).get<Transcript>();
        } catch (const json::exception& e) {
            throw ParseError(path, lineno, e.what());
        } catch (const ParseError& e) {
            throw ParseError(path, lineno, e.what());
        }
        if (auto it = where.find(t.debate_id); it != where.end()) {
            out[it->second] = std::move(t);
        } else {
            where[t.debate_id] = out.size();
            out.push_back(std::move(t));
        }
    }
    return out;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ManualClock manual;
    const bool fixed_clock = spec.deterministic_clock.value_or(spec.all_scripted());
    Clock& clock = fixed_clock ? static_cast<Clock&>(manual) : system_clock();
    auto registry = BackendRegistry::from_json(spec.backends, clock);
    auto tasks = load_tasks(spec.task);
    if (tasks.empty()) throw ConfigError("task: no instances loaded");

    fs::create_directories(spec.output_dir);
    write_file((fs::path(spec.output_dir) / "spec.resolved.json").string(), spec.to_json().dump(2) + "\n");

    ExperimentOutcome outcome;
    outcome.transcripts_path = (fs::path(spec.output_dir) / "transcripts.jsonl").string();
    std::map<std::string, Transcript> previous;
    if (spec.resume && fs::exists(outcome.transcripts_path)) {
        for (auto& t : read_transcripts(outcome.transcripts_path)) {
            if (t.status == DebateStatus::ok) previous.emplace(t.debate_id, std::move(t));
        }
    } else {
        write_file(outcome.transcripts_path, "");
    }

    const DebateConfig cfg = effective_config(spec);
    const std::string method(to_string(spec.method));
    {
        DebateConfig check = cfg;
        if (spec.method == Method::reflection) check.num_rounds = 0;
        check.validate(registry.get());
    }

    std::vector<Transcript> transcripts(tasks.size());
    std::atomic<int> reused{0};
    OrderedAppender appender(outcome.transcripts_path);
    parallel_for(tasks.size(), spec.parallelism, [&](std::size_t i) {
        const auto id = make_debate_id(tasks[i].task_id, method, cfg);
        if (auto it = previous.find(id); it != previous.end()) {
            transcripts[i] = it->second;
            ++reused;
            appender.skip(i);
            return;
        }
        Transcript t = spec.method == Method::reflection
                           ? run_reflection(tasks[i], spec.debate, *registry, spec.reflection_rounds)
                           : run_debate(tasks[i], cfg, *registry, method);
        appender.submit(i, json(t).dump());
        transcripts[i] = std::move(t);
    });
    outcome.reused = reused.load();

    auto engine = make_engine(spec.scoring, spec.task.kind);
    ScoringContext sc;
    sc.judges = registry.get();
    sc.judge_backend_id = spec.scoring.judge_backend_id;
    sc.engine = engine.get();
    sc.illegal_move_policy = spec.scoring.illegal_move_policy;
    sc.illegal_move_penalty = spec.scoring.illegal_move_penalty;
    outcome.result = score_transcripts(transcripts, sc);
    outcome.result.metadata["method"] = method;
    outcome.result.metadata["task_kind"] = to_string(spec.task.kind);
    outcome.result.metadata["config_hash"] = config_hash(cfg);
    outcome.result.metadata["catalog_version"] = PromptCatalog::builtin().version();

    json results{{"schema", "debate.results"},
                 {"schema_version", 1},
                 {"label", method},
                 {"task_kind", to_string(spec.task.kind)},
                 {"config_hash", config_hash(cfg)},
                 {"result", outcome.result}};
    outcome.results_path = (fs::path(spec.output_dir) / "results.json").string();
    write_file(outcome.results_path, results.dump(2) + "\n");

    const auto& a = outcome.result.aggregate;
    spdlog::info("{} on {}: {} = {:.4f} +/- {:.4f} (n={}, failed={}, excluded={}, reused={})", method,
                 to_string(spec.task.kind), a.metric, a.mean, a.se, a.n, a.failed, a.excluded, outcome.reused);
    if (a.n > 0) {
        outcome.report = emit_report({{method, std::string(to_string(spec.task.kind)), config_hash(cfg), outcome.result}},
                                     transcripts, (fs::path(spec.output_dir) / "report").string());
    }
    outcome.transcripts = std::move(transcripts);
    return outcome;
}

SweepTable run_sweep_experiment(const ExperimentSpec& spec, ReportFiles* report) {
    spec.validate();
    if (!spec.sweep) throw ConfigError("sweep block is required for a sweep");
    ManualClock manual;
    const bool fixed_clock = spec.deterministic_clock.value_or(spec.all_scripted());
    Clock& clock = fixed_clock ? static_cast<Clock&>(manual) : system_clock();
    auto registry = BackendRegistry::from_json(spec.backends, clock);
    auto tasks = load_tasks(spec.task);
    auto engine = make_engine(spec.scoring, spec.task.kind);
    ScoringContext sc;
    sc.judges = registry.get();
    sc.judge_backend_id = spec.scoring.judge_backend_id;
    sc.engine = engine.get();
    sc.illegal_move_policy = spec.scoring.illegal_move_policy;
    sc.illegal_move_penalty = spec.scoring.illegal_move_penalty;

    SweepOptions opt;
    opt.summarize_threshold = spec.sweep->summarize_threshold;
    opt.parallelism = spec.parallelism;
    opt.keep_transcripts = true;
    opt.scoring = &sc;
    auto table = run_sweep(spec.sweep->axis, spec.sweep->values, spec.debate, tasks, *registry, opt);

    fs::create_directories(spec.output_dir);
    write_file((fs::path(spec.output_dir) / "spec.resolved.json").string(), spec.to_json().dump(2) + "\n");
    json points = json::array();
    std::vector<Transcript> all;
    for (const auto& p : table.points) {
        json cons = json::array();
        for (const auto& c : p.consensus) cons.push_back(c ? json(*c) : json(nullptr));
        points.push_back({{"value", p.label},
                          {"config", p.config},
                          {"config_hash", config_hash(p.config)},
                          {"aggregate", p.result.aggregate},
                          {"consensus", cons}});
        all.insert(all.end(), p.transcripts.begin(), p.transcripts.end());
    }
    write_file((fs::path(spec.output_dir) / "sweep.json").string(),
               json{{"schema", "debate.sweep"}, {"axis", to_string(table.axis)}, {"points", points}}.dump(2) + "\n");
    auto files = emit_report(sweep_report_entries(table, std::string(to_string(spec.task.kind))), all,
                             (fs::path(spec.output_dir) / "report").string());
    if (report) *report = files;
    return table;
}

EvalResult score_transcript_file(const ExperimentSpec& spec, const std::string& transcripts_path) {
    auto transcripts = read_transcripts(transcripts_path);
    if (transcripts.empty()) throw Error(transcripts_path + ": no transcripts");
    ManualClock manual;
    Clock& clock = spec.deterministic_clock.value_or(spec.all_scripted()) ? static_cast<Clock&>(manual) : system_clock();
    auto registry = BackendRegistry::from_json(spec.backends, clock);
    auto engine = make_engine(spec.scoring, transcripts.front().task.kind());
    ScoringContext sc;
    sc.judges = registry.get();
    sc.judge_backend_id = spec.scoring.judge_backend_id;
    sc.engine = engine.get();
    sc.illegal_move_policy = spec.scoring.illegal_move_policy;
    sc.illegal_move_penalty = spec.scoring.illegal_move_penalty;
    auto r = score_transcripts(transcripts, sc);
    r.metadata["method"] = transcripts.front().method;
    r.metadata["task_kind"] = to_string(transcripts.front().task.kind());
    return r;
}

ReportFiles report_from_results(const std::vector<std::string>& results_paths, const std::string& out_dir) {
    std::vector<ReportEntry> entries;
    std::vector<Transcript> transcripts;
    for (const auto& p : results_paths) {
        json j;
        try {
            j = json::parse(read_file(p));
            entries.push_back({j.at("label").get<std::string>(), j.at("task_kind").get<std::string>(),
                               j.at("config_hash").get<std::string>(), j.at("result").get<EvalResult>()});
        } catch (const json::exception& e) {
            throw ParseError(p + ": " + e.what());
        }
        const auto tpath = fs::path(p).parent_path() / "transcripts.jsonl";
        if (fs::exists(tpath)) {
            auto ts = read_transcripts(tpath.string());
            transcripts.insert(transcripts.end(), ts.begin(), ts.end());
        }
    }
    return emit_report(entries, transcripts, out_dir);
}

}  // namespace debate
