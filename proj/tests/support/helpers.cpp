#include "helpers.hpp"

#include <atomic>
#include <unistd.h>

namespace testing_support {

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("debate_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

ScriptedWorld::ScriptedWorld(const debate::json& specs) {
    debate::json full = debate::json::object();
    for (const auto& [id, spec] : specs.items()) {
        full[id] = spec;
        if (!full[id].contains("kind")) full[id]["kind"] = "scripted";
    }
    registry = debate::BackendRegistry::from_json(full, clock);
}

debate::DebateConfig config_for(const std::string& id, int agents, int rounds) {
    debate::DebateConfig c;
    c.num_agents = agents;
    c.num_rounds = rounds;
    c.backend_ids.assign(static_cast<std::size_t>(agents), id);
    return c;
}

}  // namespace testing_support

namespace testing_support {

std::vector<std::string> engine_command() {
    std::vector<std::string> out;
    std::string cur;
    for (char c : std::string(DEBATE_TEST_ENGINE)) {
        if (c == '|') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace testing_support
