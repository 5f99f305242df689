#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plcert {

/// Base of every recoverable error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point or interval lies outside the domain an operation requires.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Piece count or coefficient bit length exceeded a PieceBudget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class NoInteriorFixedPoint : public Error {
public:
    using Error::Error;
};

class ClassificationUnavailable : public Error {
public:
    using Error::Error;
};

class HypothesisFailed : public Error {
public:
    using Error::Error;
};

/// No qualifying time was found within the configured search horizon.
class CoverageTimeout : public Error {
public:
    using Error::Error;
};

class DisjointnessFailure : public Error {
public:
    using Error::Error;
};

class UnknownBuiltin : public Error {
public:
    using Error::Error;
};

/// Replay of a recorded certificate step failed. `step` is the index into
/// the flattened schedule, or npos for structural checks.
class ReplayFailure : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    ReplayFailure(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Malformed `.plmap` text. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& msg)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace plcert
