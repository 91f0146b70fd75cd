#pragma once

#include <stdexcept>
#include <string>

namespace microagg {

enum class ErrorCode {
    InvalidArgument,
    EmptyInput,
    DuplicateReading,
    TimestampOffGrid,
    EmptyWindow,
    OutOfRange,
    MissingHeader,
    NoParseableRows,
    AllSeriesDropped,
    ShapeMismatch,
    TooShort,
    TooFewPoints,
    TooFewReturns,
    Singular,
    IoError,
    ParseError,
    ConfigError,
};

/// Core error type. `code` classifies the failure for the C API / exit-code
/// mapping; `field` carries the offending config path for ConfigError.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string field = {})
        : std::runtime_error(std::move(message)), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message, std::string field = {}) {
    throw Error(code, std::move(message), std::move(field));
}

}  // namespace microagg
