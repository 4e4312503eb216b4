#pragma once

#include <stdexcept>
#include <string>

namespace qholo {

// Incompatible grids passed to an operation (shape error).
class GridMismatchError : public std::invalid_argument {
public:
    explicit GridMismatchError(const std::string& what)
        : std::invalid_argument(what) {}
};

// Input is mathematically unusable (all-zero field, empty mask, zero mass, ...).
class DegenerateInputError : public std::invalid_argument {
public:
    explicit DegenerateInputError(const std::string& what)
        : std::invalid_argument(what) {}
};

class IndexRangeError : public std::out_of_range {
public:
    explicit IndexRangeError(const std::string& what)
        : std::out_of_range(what) {}
};

// Dense materialization would exceed the configured budget.
class BudgetExceededError : public std::runtime_error {
public:
    explicit BudgetExceededError(const std::string& what)
        : std::runtime_error(what) {}
};

// Config / scene-file syntax or semantic error. Carries a 1-based line number
// (0 when the error is not tied to a specific line).
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                      : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qholo
