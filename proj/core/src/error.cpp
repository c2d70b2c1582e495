#include "chronoseries/error.hpp"

namespace chronoseries {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::ordering: return "ordering";
    case ErrorCode::label_mismatch: return "label_mismatch";
    case ErrorCode::timezone: return "timezone";
    case ErrorCode::encoding: return "encoding";
    case ErrorCode::io: return "io";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::model: return "model";
    case ErrorCode::not_fitted: return "not_fitted";
    }
    return "unknown";
}

}  // namespace chronoseries
