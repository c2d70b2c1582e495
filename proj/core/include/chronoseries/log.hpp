#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace chronoseries {

/// Library-wide logger named "chronoseries". Lines look like `[INFO] Resampled ...`
/// and go to standard error unless the sinks are replaced.
std::shared_ptr<spdlog::logger> logger();

void set_log_level(spdlog::level::level_enum level);

}  // namespace chronoseries
