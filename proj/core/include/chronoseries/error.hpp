#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chronoseries {

/// Broad failure categories. The CLI prints them as `error: <code>: <message>`.
enum class ErrorCode {
    invalid_argument,
    parse_error,
    not_found,
    ordering,
    label_mismatch,
    timezone,
    encoding,
    io,
    version_mismatch,
    model,
    not_fitted,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace chronoseries
