#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ksymp {

/// Expression text could not be parsed. `offset` is the byte position of the
/// first offending character.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation failed: unbound variable or a domain error (division by zero,
/// log of a non-positive value, fractional power of a non-positive base).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model or one of its inputs violates a structural precondition.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model file could not be read. `line` is 1-based.
class ModelFileError : public std::runtime_error {
public:
    ModelFileError(const std::string& message, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + message),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

/// Numeric procedure failed (singular system, Newton non-convergence,
/// integration blow-up where that is fatal).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ksymp
