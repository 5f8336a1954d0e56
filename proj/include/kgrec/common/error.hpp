#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgrec {

/// Base of every error the engine reports. Callers that only need a message
/// can catch this; the CLI maps the concrete subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or invocation (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Bad or inconsistent input data (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Malformed N-Triples statement. `line()` is 1-based.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& diagnostic)
        : DataError("line " + std::to_string(line) + ": " + diagnostic), line_(line),
          diagnostic_(diagnostic) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& diagnostic() const noexcept { return diagnostic_; }

private:
    std::size_t line_;
    std::string diagnostic_;
};

/// Corrupt or truncated binary artifact (checkpoint, index).
class FormatError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace kgrec
