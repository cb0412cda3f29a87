#pragma once

#include <stdexcept>
#include <string>

namespace soc {

/// Base for every error raised by the toolkit. `kind()` is a stable,
/// machine-readable class name used by the CLI on failure.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error("InputError", what) {}
};

class ComputationError : public Error {
public:
    explicit ComputationError(const std::string& what) : Error("ComputationError", what) {}
};

class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error("FitError", what) {}
};

/// Malformed input row; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("ParseError", "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    ValidationError(std::size_t line, const std::string& what)
        : Error("ValidationError", "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("IoError", what) {}
};

}  // namespace soc
