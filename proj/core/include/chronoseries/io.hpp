#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chronoseries/series.hpp"

namespace chronoseries::io {

/// First line of every native-format file.
inline constexpr std::string_view native_format_version = "# chronoseries v1";

/// Explicit settings for from_csv(); anything left unset is auto-detected.
struct CsvOptions {
    /// "utf-8", "utf-16" or "latin-1".
    std::optional<std::string> encoding;
    std::optional<char> separator;
    std::optional<bool> header;
    /// Timestamp column(s), by header name or zero-based position. Two columns
    /// (a date and a time) are joined with a space before parsing.
    std::vector<std::string> timestamp_columns;
    /// "epoch", "iso8601", or a pattern built from %Y %m %d %H %M %S %z %%
    /// (%S accepts a fractional part).
    std::optional<std::string> timestamp_format;
    /// Value columns, by header name or position; default: all other columns.
    std::vector<std::string> value_columns;
    /// Replacement labels for the value columns, in order.
    std::vector<std::string> labels;
    /// Zone used for timestamps without an offset, and the zone of the series.
    std::optional<std::string> tz;
};

/// What was detected (or forced) when reading a CSV file.
struct CsvSchema {
    std::string encoding;
    char separator = ',';
    bool header = false;
    std::vector<std::size_t> timestamp_columns;
    std::string timestamp_format;
    std::vector<std::size_t> value_columns;
    std::vector<std::string> labels;
    bool slots = false;
    std::string tz = "UTC";

    /// Options that reproduce this schema without any detection.
    CsvOptions as_options() const;
};

/// Parse CSV bytes. Rows are sorted by timestamp; duplicate timestamps are an
/// error. A "start_epoch,end_epoch" header yields a slot series.
TimeSeries read_csv(std::string_view bytes, const CsvOptions& options = {}, CsvSchema* schema = nullptr);
TimeSeries from_csv(const std::filesystem::path& path, const CsvOptions& options = {}, CsvSchema* schema = nullptr);

/// Standard CSV: "epoch" (points) or "start_epoch,end_epoch" (slots), then the
/// labels. Data indexes are not written.
std::string write_csv(const TimeSeries& series);
void to_csv(const TimeSeries& series, const std::filesystem::path& path);

/// Lossless native format: metadata header lines, then epoch[,end_epoch],
/// values and index values (empty when absent) per row.
std::string write_native(const TimeSeries& series);
TimeSeries read_native(std::string_view text);
void save(const TimeSeries& series, const std::filesystem::path& path);
TimeSeries load(const std::filesystem::path& path);

/// True when `bytes` starts like a native-format file (any version).
bool is_native(std::string_view bytes);

/// Native format or CSV, chosen from the first line.
TimeSeries read_any(std::string_view bytes, const CsvOptions& options = {});
TimeSeries load_any(const std::filesystem::path& path, const CsvOptions& options = {});

/// Parse one timestamp in the given format ("epoch", "iso8601" or a pattern);
/// values without an offset are read in `tz`. Returns nullopt when it does not match.
std::optional<Timestamp> parse_timestamp(std::string_view text, std::string_view format, std::string_view tz);

/// Split one CSV line on `separator`, honouring double quotes.
std::vector<std::string> split_csv_line(std::string_view line, char separator);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace chronoseries::io
