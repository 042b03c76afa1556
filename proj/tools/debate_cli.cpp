#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "debate/debate.h"

using json = nlohmann::json;

namespace {

struct SpecFlags {
    std::string spec_path;
    std::optional<std::string> output_dir;
    std::optional<std::string> method;
    std::optional<int> agents;
    std::optional<int> rounds;
    std::optional<std::string> style;
    std::optional<bool> summarize;
    std::optional<int> count;
    std::optional<std::uint64_t> seed;
    std::optional<int> parallelism;
    bool resume = false;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
    cmd->add_option("-s,--spec", f.spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--output-dir", f.output_dir, "Override output_dir");
    cmd->add_option("--method", f.method, "Override method: single, reflection, majority, debate");
    cmd->add_option("--agents", f.agents, "Override debate.num_agents");
    cmd->add_option("--rounds", f.rounds, "Override debate.num_rounds");
    cmd->add_option("--style", f.style, "Override debate.prompt_style: short or long");
    cmd->add_option("--summarize", f.summarize, "Override debate.summarize_others");
    cmd->add_option("--count", f.count, "Override task.count");
    cmd->add_option("--seed", f.seed, "Override task.seed");
    cmd->add_option("-j,--parallelism", f.parallelism, "Instances run concurrently");
    cmd->add_flag("--resume", f.resume, "Skip debates already in transcripts.jsonl");
}

int report_error(dbk_status s) {
    std::cerr << "error: " << dbk_status_string(s) << ": " << dbk_last_error() << "\n";
    return static_cast<int>(s) == 0 ? 1 : static_cast<int>(s);
}

dbk_experiment* load_experiment(const SpecFlags& f, dbk_status& status) {
    json spec;
    try {
        std::ifstream in(f.spec_path);
        spec = json::parse(in);
    } catch (const json::exception& e) {
        std::cerr << "error: " << f.spec_path << ": " << e.what() << "\n";
        status = DBK_ERR_PARSE;
        return nullptr;
    }
    if (f.output_dir) spec["output_dir"] = std::filesystem::absolute(*f.output_dir).string();
    if (f.method) spec["method"] = *f.method;
    if (f.count) spec["task"]["count"] = *f.count;
    if (f.seed) spec["task"]["seed"] = *f.seed;
    if (f.parallelism) spec["parallelism"] = *f.parallelism;
    if (f.resume) spec["resume"] = true;
    if (f.rounds) spec["debate"]["num_rounds"] = *f.rounds;
    if (f.style) spec["debate"]["prompt_style"] = *f.style;
    if (f.summarize) spec["debate"]["summarize_others"] = *f.summarize;
    if (f.agents) {
        auto& d = spec["debate"];
        d["num_agents"] = *f.agents;
        if (d.contains("backend_ids") && d["backend_ids"].is_array() && !d["backend_ids"].empty()) {
            json ids = json::array();
            for (int i = 0; i < *f.agents; ++i) ids.push_back(d["backend_ids"][std::min<std::size_t>(i, d["backend_ids"].size() - 1)]);
            d["backend_ids"] = ids;
        }
    }
    const auto base = std::filesystem::path(f.spec_path).parent_path().string();
    dbk_experiment* exp = nullptr;
    status = dbk_experiment_from_json(spec.dump().c_str(), base.empty() ? "." : base.c_str(), &exp);
    return exp;
}

int print_result(dbk_status s, dbk_result* r) {
    if (s != DBK_OK) return report_error(s);
    std::cout << dbk_result_json(r) << "\n";
    dbk_result_free(r);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent debate experiment runner"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    SpecFlags run_flags, sweep_flags, score_flags;
    auto* run = app.add_subcommand("run", "Run one experiment");
    add_spec_flags(run, run_flags);

    auto* sweep = app.add_subcommand("sweep", "Run the spec's axis sweep");
    add_spec_flags(sweep, sweep_flags);

    auto* score = app.add_subcommand("score", "Re-score a transcripts file");
    add_spec_flags(score, score_flags);
    std::string transcripts;
    score->add_option("-t,--transcripts", transcripts, "transcripts.jsonl to score")->required()->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "Build report tables from results files");
    std::vector<std::string> results;
    std::string report_out;
    report->add_option("-r,--results", results, "results.json files")->required()->check(CLI::ExistingFile);
    report->add_option("-o,--out", report_out, "Output directory")->required();

    auto* fetch = app.add_subcommand("fetch", "Download a dataset file");
    std::string url, dest;
    fetch->add_option("--url", url, "Source URL")->required();
    fetch->add_option("--dest", dest, "Destination path")->required();

    CLI11_PARSE(app, argc, argv);

    if (auto s = dbk_set_log_level(log_level.c_str()); s != DBK_OK) return report_error(s);

    if (run->parsed() || sweep->parsed() || score->parsed()) {
        const SpecFlags& f = run->parsed() ? run_flags : sweep->parsed() ? sweep_flags : score_flags;
        dbk_status s = DBK_OK;
        dbk_experiment* exp = load_experiment(f, s);
        if (!exp) return s == DBK_ERR_PARSE && std::string(dbk_last_error()).empty() ? 3 : report_error(s);
        dbk_result* r = nullptr;
        if (run->parsed()) s = dbk_run(exp, &r);
        else if (sweep->parsed()) s = dbk_sweep(exp, &r);
        else s = dbk_score(exp, transcripts.c_str(), &r);
        const int rc = print_result(s, r);
        dbk_experiment_free(exp);
        return rc;
    }
    if (report->parsed()) {
        std::vector<const char*> paths;
        for (const auto& p : results) paths.push_back(p.c_str());
        dbk_result* r = nullptr;
        return print_result(dbk_report(paths.data(), paths.size(), report_out.c_str(), &r), r);
    }
    if (fetch->parsed()) {
        if (auto s = dbk_fetch(url.c_str(), dest.c_str()); s != DBK_OK) return report_error(s);
        std::cout << dest << "\n";
    }
    return 0;
}
