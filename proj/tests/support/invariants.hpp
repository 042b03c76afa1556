#pragma once

#include <memory>
#include <string>
#include <vector>

#include "debate/backends.hpp"
#include "debate/debate.hpp"

namespace invariants {

/// Every protocol violation found in a transcript, as readable messages.
/// Checks round and turn counts, that each debate prompt embeds exactly the
/// other agents' previous-round responses (or the summary recorded for that
/// agent and round), and that each agent's history only grows.
std::vector<std::string> check(const debate::Transcript& t);

/// One randomized (task, config, scripted backends) combination.
struct Combo {
    debate::TaskInstance task;
    debate::DebateConfig config;
    debate::json backends;
    std::string description;
};

Combo random_combo(std::uint64_t seed);

}  // namespace invariants
