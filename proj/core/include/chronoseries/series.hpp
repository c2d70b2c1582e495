#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chronoseries/timemath.hpp"

namespace chronoseries {

/// Names of the data indexes the library itself computes.
namespace index_names {
inline constexpr std::string_view data_loss = "data_loss";
inline constexpr std::string_view data_reconstructed = "data_reconstructed";
inline constexpr std::string_view forecast = "forecast";
inline constexpr std::string_view anomaly = "anomaly";
}  // namespace index_names

/// Per-element indicators in [0,1]. A name that is absent was never computed,
/// which is not the same as a stored 0.
class DataIndexes {
public:
    using Entry = std::pair<std::string, double>;

    DataIndexes() = default;
    DataIndexes(std::initializer_list<Entry> entries);

    std::optional<double> get(std::string_view name) const noexcept;
    bool has(std::string_view name) const noexcept { return get(name).has_value(); }

    /// Throws Error{invalid_argument} unless 0 <= value <= 1.
    void set(std::string_view name, double value);
    void erase(std::string_view name);

    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    friend bool operator==(const DataIndexes&, const DataIndexes&) = default;

private:
    std::vector<Entry> entries_;  // sorted by name
};

/// Element data as given by callers: either positional values or label/value
/// pairs. Inside a series the labels live once on the series and elements keep
/// only the values, in series label order.
class DataPayload {
public:
    DataPayload() = default;
    DataPayload(std::vector<double> values) : values_(std::move(values)) {}  // NOLINT: positional
    DataPayload(std::initializer_list<std::pair<std::string, double>> labeled);
    explicit DataPayload(std::vector<std::pair<std::string, double>> labeled);

    bool labeled() const noexcept { return !labels_.empty(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Labeled lookup; throws Error{not_found}.
    double at(std::string_view label) const;

private:
    std::vector<std::string> labels_;
    std::vector<double> values_;
};

struct DataTimePoint {
    Timestamp t;
    DataPayload data;
    DataIndexes indexes;
};

struct DataTimeSlot {
    Timestamp start;
    Timestamp end;
    TimeUnit unit;
    DataPayload data;
    DataIndexes indexes;
};

enum class ElementKind { points, slots };

/// Stored element. For points `end == start`.
struct Element {
    Timestamp start;
    Timestamp end;
    std::vector<double> data;
    DataIndexes indexes;

    Timestamp t() const noexcept { return start; }

    double data_loss() const noexcept {
        return indexes.get(index_names::data_loss).value_or(0.0);
    }

    friend bool operator==(const Element&, const Element&) = default;
};

/// Sampling resolution: a unit, or variable (no unit) with a representative
/// interval used wherever a single sampling interval is needed.
struct Resolution {
    std::optional<TimeUnit> unit;
    double auto_interval = 0.0;

    bool variable() const noexcept { return !unit.has_value(); }
};

/// Equal consecutive deltas give that delta as the unit; otherwise the result
/// is variable with the most frequent delta as interval (median on ties).
/// Needs at least two timestamps.
Resolution detect_resolution(const std::vector<Timestamp>& timestamps);

class TimeSeries;
Resolution detect_resolution(const TimeSeries& points);

/// Ordered, homogeneous sequence of points or slots with a time zone and a
/// resolution. Immutable: every operation returns a new series.
class TimeSeries {
public:
    class Builder;

    TimeSeries() = default;

    ElementKind kind() const noexcept { return kind_; }
    bool is_points() const noexcept { return kind_ == ElementKind::points; }
    bool is_slots() const noexcept { return kind_ == ElementKind::slots; }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    bool labeled() const noexcept { return labeled_; }
    /// Position of `label`; throws Error{not_found} listing the available labels.
    std::size_t label_position(std::string_view label) const;

    const std::string& tz() const noexcept { return tz_; }
    const Resolution& resolution() const noexcept { return resolution_; }
    bool variable_resolution() const noexcept { return resolution_.variable(); }
    /// Seconds between samples: the unit length when fixed and physical,
    /// the detected interval when variable.
    double auto_interval() const noexcept { return resolution_.auto_interval; }

    std::size_t size() const noexcept { return elements_.size(); }
    bool empty() const noexcept { return elements_.empty(); }
    auto begin() const noexcept { return elements_.begin(); }
    auto end() const noexcept { return elements_.end(); }
    const std::vector<Element>& elements() const noexcept { return elements_; }

    /// Negative positions count from the end.
    const Element& at(std::ptrdiff_t position) const;
    /// Exact timestamp match (point time or slot start).
    const Element& at(Timestamp t) const;
    const Element& operator[](std::ptrdiff_t position) const { return at(position); }
    TimeSeries operator[](std::string_view label) const { return select(label); }

    DataPayload payload(std::size_t position) const;
    double value(std::size_t position, std::string_view label) const;

    /// Univariate series with only `label`.
    TimeSeries select(std::string_view label) const;
    /// Half-open [from, to) by position; negative positions count from the end.
    TimeSeries slice(std::ptrdiff_t from, std::ptrdiff_t to) const;
    /// Half-open [from, to) by timestamp.
    TimeSeries slice(Timestamp from, Timestamp to) const;

    TimeSeries append(const DataTimePoint& point) const;
    TimeSeries append(const DataTimeSlot& slot) const;

    /// Same instants, different display and calendar zone.
    TimeSeries change_tz(std::string_view tz) const;

    /// Every index name used by at least one element, library names first.
    std::vector<std::string> index_names() const;

    /// One-line description ("Time series of #2519 points at 1h resolution, ...").
    std::string summary() const;

    friend bool operator==(const TimeSeries& a, const TimeSeries& b);

private:
    TimeSeries with_metadata() const;

    ElementKind kind_ = ElementKind::points;
    std::vector<std::string> labels_;
    bool labeled_ = true;
    std::string tz_ = "UTC";
    Resolution resolution_;
    std::vector<Element> elements_;
};

/// Incremental construction with full validation of ordering, slot succession
/// and label homogeneity.
class TimeSeries::Builder {
public:
    static Builder points(std::vector<std::string> labels, std::string tz = "UTC");
    static Builder positional_points(std::size_t arity, std::string tz = "UTC");
    static Builder slots(std::vector<std::string> labels, TimeUnit unit, std::string tz = "UTC");
    /// Empty builder with the metadata (kind, labels, tz, resolution) of `series`.
    static Builder like(const TimeSeries& series);

    /// Declare the resolution of a point series instead of detecting it.
    Builder& resolution(Resolution resolution);

    Builder& append(const DataTimePoint& point);
    Builder& append(const DataTimeSlot& slot);
    /// Append already-ordered values (series label order).
    Builder& append(const Element& element);
    Builder& append(Timestamp t, std::vector<double> values, DataIndexes indexes = {});

    void reserve(std::size_t n) { series_.elements_.reserve(n); }
    std::size_t size() const noexcept { return series_.elements_.size(); }
    const TimeSeries& peek() const noexcept { return series_; }

    TimeSeries build() &&;

private:
    friend class TimeSeries;
    Builder() = default;

    std::vector<double> order_payload(const DataPayload& payload) const;
    void check_values(const std::vector<double>& values) const;

    TimeSeries series_;
    bool declared_resolution_ = false;
};

}  // namespace chronoseries
