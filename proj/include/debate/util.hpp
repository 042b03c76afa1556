#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace debate {

using json = nlohmann::json;

/// Lowercase hex SHA-256 of the input.
std::string sha256_hex(std::string_view data);

/// First 16 hex digits of sha256_hex.
std::string short_hash(std::string_view data);

/// 64-bit mixing of a sequence of values into one seed (splitmix64 chain).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);
std::uint64_t hash64(std::string_view text);

/// Portable random stream: splitmix64. Identical output on every platform,
/// unlike the standard distributions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform();
    /// Uniform integer in [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

private:
    std::uint64_t state_;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string replace_all(std::string s, std::string_view from, std::string_view to);
int count_words(std::string_view s);

/// Fills a template: each "{}" takes the next positional value, each
/// "<Name>" present in `named` is replaced. Any other text, including
/// "{{answer}}" and unknown "<...>" markers, is left verbatim.
std::string fill_template(std::string_view tmpl, const std::vector<std::string>& positional,
                          const std::map<std::string, std::string>& named = {});

/// Canonical decimal rendering: integers without a fraction, otherwise up to
/// ten significant digits with trailing zeros removed.
std::string format_number(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Clock abstraction so rate limiting, backoff, and timestamps can run on
/// virtual time in tests and fixed time in reproducible runs.
class Clock {
public:
    using time_point = std::chrono::steady_clock::time_point;
    using duration = std::chrono::steady_clock::duration;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_until(time_point t) = 0;
    /// ISO-8601 UTC wall-clock timestamp.
    virtual std::string timestamp() = 0;

    void sleep_for(duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
public:
    time_point now() override;
    void sleep_until(time_point t) override;
    std::string timestamp() override;
};

/// Virtual time. sleep_until advances the clock instead of blocking; the
/// wall timestamp is pinned to the epoch so outputs are reproducible.
class ManualClock final : public Clock {
public:
    time_point now() override;
    void sleep_until(time_point t) override;
    std::string timestamp() override;
    void advance(duration d);

private:
    std::mutex mu_;
    time_point now_{};
};

Clock& system_clock();

/// Calls fn(i) for i in [0, n) on up to `threads` worker threads. The first
/// exception (by index) is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace debate
