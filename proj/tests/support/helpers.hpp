#pragma once

#include <filesystem>
#include <string>

#include "debate/backends.hpp"
#include "debate/debate.hpp"
#include "debate/util.hpp"

namespace testing_support {

inline std::string fixture(const std::string& name) { return std::string(DEBATE_FIXTURES_DIR) + "/" + name; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// Registry with one scripted backend per entry of `specs`, on a manual clock.
struct ScriptedWorld {
    debate::ManualClock clock;
    std::unique_ptr<debate::BackendRegistry> registry;

    explicit ScriptedWorld(const debate::json& specs);
};

/// Config with `agents` agents on backend `id`.
debate::DebateConfig config_for(const std::string& id, int agents, int rounds);

}  // namespace testing_support

namespace testing_support {

/// Engine command configured at build time ('|'-separated); empty when no
/// engine was found.
std::vector<std::string> engine_command();

}  // namespace testing_support
