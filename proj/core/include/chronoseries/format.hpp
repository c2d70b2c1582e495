#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace chronoseries {

/// Shortest decimal text that parses back to the same double.
std::string round_trip(double value);

/// Like round_trip(), but integral values keep a trailing ".0" (1546475294.0).
std::string repr(double value);

/// Strict decimal parse: surrounding blanks allowed, anything else rejected.
std::optional<double> parse_double(std::string_view text);

std::string_view trim(std::string_view text) noexcept;

}  // namespace chronoseries
