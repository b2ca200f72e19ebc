#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace captl {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(format(message, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& message, std::size_t line, std::size_t column) {
        if (line == 0) return message;
        return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    }

    std::size_t line_;
    std::size_t column_;
};

/// Well-formed input that violates a semantic rule (model invariants, requirement rules).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Value iteration hit its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Inconsistent intermediate result during synthesis or composition.
class SynthesisError : public Error {
public:
    using Error::Error;
};

} // namespace captl
