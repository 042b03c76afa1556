#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <sys/types.h>

namespace debate {

/// Child process with line-oriented stdin/stdout pipes. The child is killed
/// and reaped on destruction.
class Subprocess {
public:
    /// argv[0] is looked up on PATH. Throws Error if the process cannot start.
    explicit Subprocess(const std::vector<std::string>& argv);
    ~Subprocess();

    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;

    void write_line(const std::string& line);
    /// Next stdout line without the newline; nullopt on timeout or EOF.
    std::optional<std::string> read_line(std::chrono::milliseconds timeout);
    bool alive();

private:
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    std::string buffer_;
    bool eof_ = false;
};

}  // namespace debate
