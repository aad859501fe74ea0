#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigcmp {

/// Base of every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or options (bad alpha, unknown test name, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be used: malformed files, too few rows.
class DataError : public Error {
public:
    using Error::Error;
};

/// A malformed line in a score file. `line` is 1-based; `field` is 1-based or 0 when
/// the whole line is at fault.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, std::size_t field, const std::string& what)
        : DataError("line " + std::to_string(line) +
                    (field ? ", field " + std::to_string(field) : std::string{}) + ": " + what),
          line_(line),
          field_(field) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::size_t field_;
};

/// The sample is valid input but the requested statistic is undefined for it
/// (zero variance, every difference equal to delta, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

}  // namespace sigcmp
