#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace debate {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment or debate configuration. The message names the field.
class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

class PgnParseError : public ParseError {
public:
    using ParseError::ParseError;
};

class UnknownTaskKind : public Error {
public:
    using Error::Error;
};

class EmptyContext : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
    virtual bool transient() const noexcept { return false; }
};

class AuthError : public BackendError {
public:
    using BackendError::BackendError;
};

class RateLimited : public BackendError {
public:
    using BackendError::BackendError;
    bool transient() const noexcept override { return true; }
};

class TransportError : public BackendError {
public:
    using BackendError::BackendError;
    bool transient() const noexcept override { return true; }
};

/// The backend rejected the prompt as too long. Never retried as-is.
class ContextOverflow : public BackendError {
public:
    using BackendError::BackendError;
};

class EngineUnavailable : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class IllegalMove : public Error {
public:
    using Error::Error;
};

}  // namespace debate
