#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simcal {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Result not representable (tail probability below the supported floor).
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// A row whose sample variance is zero; the t statistic is undefined.
class DegenerateRowError : public std::runtime_error {
public:
    explicit DegenerateRowError(const std::string& what) : std::runtime_error(what) {}
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(line == 0 ? what
                                       : what + " (line " + std::to_string(line) +
                                             ", column " + std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace simcal
