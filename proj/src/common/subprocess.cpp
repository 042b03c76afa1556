#include "debate/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "debate/errors.hpp"

namespace debate {

Subprocess::Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw Error("empty command");
    int to_child[2], from_child[2], exec_err[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0 || pipe2(exec_err, O_CLOEXEC) != 0) {
        throw Error(std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        int devnull = open("/dev/null", O_WRONLY);
        if (devnull >= 0) dup2(devnull, STDERR_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        close(exec_err[0]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        int e = errno;
        [[maybe_unused]] auto n = ::write(exec_err[1], &e, sizeof e);
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    close(exec_err[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];

    int child_errno = 0;
    auto n = ::read(exec_err[0], &child_errno, sizeof child_errno);
    close(exec_err[0]);
    if (n == static_cast<ssize_t>(sizeof child_errno)) {
        waitpid(pid_, nullptr, 0);
        pid_ = -1;
        close(in_fd_);
        close(out_fd_);
        throw Error("cannot execute '" + argv[0] + "': " + std::strerror(child_errno));
    }
    signal(SIGPIPE, SIG_IGN);
}

Subprocess::~Subprocess() {
    if (in_fd_ >= 0) close(in_fd_);
    if (out_fd_ >= 0) close(out_fd_);
    if (pid_ > 0) {
        kill(pid_, SIGKILL);
        waitpid(pid_, nullptr, 0);
    }
}

void Subprocess::write_line(const std::string& line) {
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::write(in_fd_, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("write to child: ") + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (eof_) return std::nullopt;
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd pfd{out_fd_, POLLIN, 0};
        int r = poll(&pfd, 1, static_cast<int>(left.count()));
        if (r < 0) {
            if (errno == EINTR) continue;
            return std::nullopt;
        }
        if (r == 0) return std::nullopt;
        char buf[4096];
        ssize_t n = ::read(out_fd_, buf, sizeof buf);
        if (n <= 0) {
            eof_ = true;
            continue;
        }
        buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

bool Subprocess::alive() {
    if (pid_ <= 0) return false;
    int status = 0;
    return waitpid(pid_, &status, WNOHANG) == 0;
}

}  // namespace debate
