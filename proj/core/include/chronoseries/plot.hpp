#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronoseries/series.hpp"

namespace chronoseries::plot {

/// Version tag of the data island embedded in HTML output.
inline constexpr std::string_view island_version = "chronoseries-plot v1";
inline constexpr std::size_t default_max_points = 10000;

struct LabelTrace {
    std::string label;
    std::vector<double> values;
    /// Per-bucket extremes; empty when the series was not aggregated.
    std::vector<double> band_min;
    std::vector<double> band_max;
};

struct IndexTrace {
    std::string name;
    /// nullopt where no element of the bucket carries the index.
    std::vector<std::optional<double>> values;
};

/// Plot-ready data: one entry per bucket of `factor` consecutive elements.
struct PlotSpec {
    std::string tz = "UTC";
    ElementKind kind = ElementKind::points;
    std::size_t factor = 1;
    std::vector<Timestamp> starts;  ///< first element of each bucket
    std::vector<Timestamp> ends;    ///< last element end of each bucket
    std::vector<LabelTrace> labels;
    std::vector<IndexTrace> indexes;

    std::size_t size() const noexcept { return starts.size(); }
};

/// Buckets the series by the smallest power of 10 that brings it to at most
/// `max_points` entries. Buckets carry the mean value and a min/max band;
/// indexes are averaged except anomaly, which keeps the maximum.
/// `labels` restricts the plotted labels; an explicitly empty list is an error.
PlotSpec prepare(const TimeSeries& series, std::size_t max_points = default_max_points,
                 const std::optional<std::vector<std::string>>& labels = std::nullopt);

/// Smallest power of 10 f with ceil(size / f) <= max_points.
std::size_t aggregation_factor(std::size_t size, std::size_t max_points);

/// The versioned JSON data island consumed by the inline renderer.
nlohmann::ordered_json island(const PlotSpec& spec);

/// Self-contained page: one JSON data island plus one inline renderer script.
std::string html(const PlotSpec& spec, std::string_view title = "chronoseries plot");
void render_html(const PlotSpec& spec, const std::filesystem::path& path, std::string_view title = "chronoseries plot");

struct ImageOptions {
    int width = 1200;
    int height = 500;
};

struct Tick {
    Timestamp t;
    std::string label;
};

/// Axis ticks on local wall-clock boundaries of `tz`, at most about `max_ticks`.
std::vector<Tick> time_ticks(Timestamp first, Timestamp last, std::string_view tz, std::size_t max_ticks = 8);

std::string svg(const PlotSpec& spec, const ImageOptions& options = {});
std::vector<std::uint8_t> png(const PlotSpec& spec, const ImageOptions& options = {});
/// SVG or PNG, chosen from the file extension.
void render_image(const PlotSpec& spec, const std::filesystem::path& path, const ImageOptions& options = {});

}  // namespace chronoseries::plot
