#include "chronoseries/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/format.hpp"
#include "chronoseries/timezone.hpp"

namespace chronoseries {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ", ";
        out += "'" + item + "'";
    }
    return out;
}

int index_rank(std::string_view name) {
    if (name == index_names::data_loss) return 0;
    if (name == index_names::data_reconstructed) return 1;
    if (name == index_names::forecast) return 2;
    if (name == index_names::anomaly) return 3;
    return 4;
}

std::string describe_time(Timestamp t, const std::string& tz) {
    return repr(t.epoch) + " (" + format_timestamp(t, tz) + ")";
}

}  // namespace

// ---------------------------------------------------------------- DataIndexes

DataIndexes::DataIndexes(std::initializer_list<Entry> entries) {
    for (const auto& [name, value] : entries) set(name, value);
}

std::optional<double> DataIndexes::get(std::string_view name) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), name,
                               [](const Entry& e, std::string_view n) { return e.first < n; });
    if (it != entries_.end() && it->first == name) return it->second;
    return std::nullopt;
}

void DataIndexes::set(std::string_view name, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("data index '{}' must be within [0,1], got {}", name, round_trip(value)));
    }
    auto it = std::lower_bound(entries_.begin(), entries_.end(), name,
                               [](const Entry& e, std::string_view n) { return e.first < n; });
    if (it != entries_.end() && it->first == name) {
        it->second = value;
    } else {
        entries_.insert(it, Entry{std::string(name), value});
    }
}

void DataIndexes::erase(std::string_view name) {
    std::erase_if(entries_, [name](const Entry& e) { return e.first == name; });
}

// ---------------------------------------------------------------- DataPayload

DataPayload::DataPayload(std::initializer_list<std::pair<std::string, double>> labeled)
    : DataPayload(std::vector<std::pair<std::string, double>>(labeled)) {}

DataPayload::DataPayload(std::vector<std::pair<std::string, double>> labeled) {
    labels_.reserve(labeled.size());
    values_.reserve(labeled.size());
    for (auto& [label, value] : labeled) {
        if (std::find(labels_.begin(), labels_.end(), label) != labels_.end()) {
            throw Error(ErrorCode::label_mismatch, "duplicate label '" + label + "' in payload");
        }
        labels_.push_back(std::move(label));
        values_.push_back(value);
    }
}

double DataPayload::at(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return values_[i];
    }
    throw Error(ErrorCode::not_found, fmt::format("label '{}' not found (available: {})", label, join(labels_)));
}

// ---------------------------------------------------------------- resolution

Resolution detect_resolution(const std::vector<Timestamp>& timestamps) {
    if (timestamps.size() < 2) {
        throw Error(ErrorCode::invalid_argument, "resolution detection needs at least 2 points");
    }
    std::vector<double> deltas;
    deltas.reserve(timestamps.size() - 1);
    for (std::size_t i = 1; i < timestamps.size(); ++i) deltas.push_back(timestamps[i] - timestamps[i - 1]);

    Resolution result;
    const bool uniform = std::all_of(deltas.begin(), deltas.end(), [&](double d) { return d == deltas.front(); });
    if (uniform) {
        const double d = deltas.front();
        result.auto_interval = d;
        if (d > 0 && d == std::floor(d) && d < 9.2e18) {
            const auto whole = static_cast<std::int64_t>(d);
            if (whole % 3600 == 0) {
                result.unit = TimeUnit(whole / 3600, UnitKind::hours);
            } else if (whole % 60 == 0) {
                result.unit = TimeUnit(whole / 60, UnitKind::minutes);
            } else {
                result.unit = TimeUnit(whole, UnitKind::seconds);
            }
        }
        return result;
    }

    std::map<double, std::size_t> histogram;
    for (double d : deltas) ++histogram[d];
    std::size_t best = 0;
    std::size_t best_count = 0;
    double mode = 0.0;
    for (const auto& [delta, count] : histogram) {
        if (count > best) {
            best = count;
            mode = delta;
            best_count = 1;
        } else if (count == best) {
            ++best_count;
        }
    }
    if (best_count == 1 && best > 1) {
        result.auto_interval = mode;
    } else {
        std::sort(deltas.begin(), deltas.end());
        const std::size_t n = deltas.size();
        result.auto_interval = n % 2 == 1 ? deltas[n / 2] : (deltas[n / 2 - 1] + deltas[n / 2]) / 2.0;
    }
    return result;
}

Resolution detect_resolution(const TimeSeries& points) {
    if (!points.is_points()) {
        throw Error(ErrorCode::invalid_argument, "resolution detection applies to point series");
    }
    std::vector<Timestamp> timestamps;
    timestamps.reserve(points.size());
    for (const auto& e : points) timestamps.push_back(e.start);
    return detect_resolution(timestamps);
}

// ---------------------------------------------------------------- TimeSeries

std::size_t TimeSeries::label_position(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return i;
    }
    throw Error(ErrorCode::not_found, fmt::format("label '{}' not found (available: {})", label, join(labels_)));
}

const Element& TimeSeries::at(std::ptrdiff_t position) const {
    const auto n = static_cast<std::ptrdiff_t>(elements_.size());
    const std::ptrdiff_t index = position < 0 ? n + position : position;
    if (index < 0 || index >= n) {
        throw Error(ErrorCode::not_found, fmt::format("position {} out of bounds for a series of {} elements", position, n));
    }
    return elements_[static_cast<std::size_t>(index)];
}

const Element& TimeSeries::at(Timestamp t) const {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), t,
                               [](const Element& e, Timestamp value) { return e.start < value; });
    if (it == elements_.end() || it->start != t) {
        throw Error(ErrorCode::not_found, "no element at " + describe_time(t, tz_));
    }
    return *it;
}

DataPayload TimeSeries::payload(std::size_t position) const {
    const Element& e = at(static_cast<std::ptrdiff_t>(position));
    if (!labeled_) return DataPayload(e.data);
    std::vector<std::pair<std::string, double>> pairs;
    pairs.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) pairs.emplace_back(labels_[i], e.data[i]);
    return DataPayload(std::move(pairs));
}

double TimeSeries::value(std::size_t position, std::string_view label) const {
    return at(static_cast<std::ptrdiff_t>(position)).data[label_position(label)];
}

TimeSeries TimeSeries::select(std::string_view label) const {
    const std::size_t column = label_position(label);
    TimeSeries out = *this;
    out.labels_ = {labels_[column]};
    for (auto& e : out.elements_) e.data = {e.data[column]};
    return out;
}

TimeSeries TimeSeries::with_metadata() const {
    TimeSeries out;
    out.kind_ = kind_;
    out.labels_ = labels_;
    out.labeled_ = labeled_;
    out.tz_ = tz_;
    out.resolution_ = resolution_;
    return out;
}

TimeSeries TimeSeries::slice(std::ptrdiff_t from, std::ptrdiff_t to) const {
    const auto n = static_cast<std::ptrdiff_t>(elements_.size());
    const std::ptrdiff_t a = std::clamp(from < 0 ? n + from : from, std::ptrdiff_t{0}, n);
    const std::ptrdiff_t b = std::clamp(to < 0 ? n + to : to, std::ptrdiff_t{0}, n);
    if (a > b) throw Error(ErrorCode::invalid_argument, fmt::format("inverted slice range [{}, {})", from, to));
    TimeSeries out = with_metadata();
    out.elements_.assign(elements_.begin() + a, elements_.begin() + b);
    return out;
}

TimeSeries TimeSeries::slice(Timestamp from, Timestamp to) const {
    if (to < from) {
        throw Error(ErrorCode::invalid_argument,
                    "inverted slice range from " + describe_time(from, tz_) + " to " + describe_time(to, tz_));
    }
    auto first = std::lower_bound(elements_.begin(), elements_.end(), from,
                                  [](const Element& e, Timestamp value) { return e.start < value; });
    auto last = std::lower_bound(first, elements_.end(), to,
                                 [](const Element& e, Timestamp value) { return e.start < value; });
    TimeSeries out = with_metadata();
    out.elements_.assign(first, last);
    return out;
}

TimeSeries TimeSeries::append(const DataTimePoint& point) const {
    Builder builder = Builder::like(*this);
    builder.reserve(elements_.size() + 1);
    for (const auto& e : elements_) builder.series_.elements_.push_back(e);
    builder.append(point);
    builder.declared_resolution_ = false;
    return std::move(builder).build();
}

TimeSeries TimeSeries::append(const DataTimeSlot& slot) const {
    Builder builder = Builder::like(*this);
    builder.reserve(elements_.size() + 1);
    for (const auto& e : elements_) builder.series_.elements_.push_back(e);
    builder.append(slot);
    return std::move(builder).build();
}

TimeSeries TimeSeries::change_tz(std::string_view tz) const {
    TimeZone::get(tz);
    if (is_slots() && resolution_.unit && resolution_.unit->is_calendar() && tz != tz_ && !elements_.empty()) {
        throw Error(ErrorCode::invalid_argument,
                    "cannot move a series of " + resolution_.unit->str() + " slots to another time zone; "
                    "slot boundaries are calendar-aligned in '" + tz_ + "'");
    }
    TimeSeries out = *this;
    out.tz_ = std::string(tz);
    return out;
}

std::vector<std::string> TimeSeries::index_names() const {
    std::set<std::string, std::less<>> names;
    for (const auto& e : elements_) {
        for (const auto& [name, value] : e.indexes) names.insert(name);
    }
    std::vector<std::string> out(names.begin(), names.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) { return index_rank(a) < index_rank(b); });
    return out;
}

std::string TimeSeries::summary() const {
    if (elements_.empty()) return "empty time series";
    const std::size_t n = elements_.size();
    if (is_slots()) {
        return fmt::format("Time series of #{} slots of {}, from slot starting @ {} to slot starting @ {}", n,
                           resolution_.unit ? resolution_.unit->str() : std::string("variable length"),
                           describe_time(elements_.front().start, tz_), describe_time(elements_.back().start, tz_));
    }
    std::string resolution;
    if (resolution_.unit) {
        resolution = resolution_.unit->str() + " resolution";
    } else if (n >= 2) {
        resolution = "variable resolution (~" + round_trip(resolution_.auto_interval) + "s)";
    } else {
        resolution = "variable resolution";
    }
    return fmt::format("Time series of #{} points at {}, from point @ {} to point @ {}", n, resolution,
                       describe_time(elements_.front().start, tz_), describe_time(elements_.back().start, tz_));
}

bool operator==(const TimeSeries& a, const TimeSeries& b) {
    return a.kind_ == b.kind_ && a.labels_ == b.labels_ && a.labeled_ == b.labeled_ && a.tz_ == b.tz_ &&
           a.resolution_.unit == b.resolution_.unit && a.elements_ == b.elements_;
}

// ---------------------------------------------------------------- Builder

TimeSeries::Builder TimeSeries::Builder::points(std::vector<std::string> labels, std::string tz) {
    TimeZone::get(tz);
    std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() != labels.size()) throw Error(ErrorCode::label_mismatch, "duplicate labels: " + join(labels));
    Builder b;
    b.series_.kind_ = ElementKind::points;
    b.series_.labels_ = std::move(labels);
    b.series_.tz_ = std::move(tz);
    return b;
}

TimeSeries::Builder TimeSeries::Builder::positional_points(std::size_t arity, std::string tz) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < arity; ++i) labels.push_back(std::to_string(i));
    Builder b = points(std::move(labels), std::move(tz));
    b.series_.labeled_ = false;
    return b;
}

TimeSeries::Builder TimeSeries::Builder::slots(std::vector<std::string> labels, TimeUnit unit, std::string tz) {
    Builder b = points(std::move(labels), std::move(tz));
    b.series_.kind_ = ElementKind::slots;
    b.series_.resolution_.unit = unit;
    b.series_.resolution_.auto_interval = unit.is_physical() ? unit.seconds() : 0.0;
    b.declared_resolution_ = true;
    return b;
}

TimeSeries::Builder TimeSeries::Builder::like(const TimeSeries& series) {
    Builder b;
    b.series_ = series.with_metadata();
    b.series_.elements_.clear();
    b.declared_resolution_ = series.is_slots() || !series.resolution_.variable() || series.size() >= 2;
    return b;
}

TimeSeries::Builder& TimeSeries::Builder::resolution(Resolution resolution) {
    if (series_.is_slots()) throw Error(ErrorCode::invalid_argument, "slot series take their resolution from the slot unit");
    if (resolution.unit && resolution.unit->is_physical()) resolution.auto_interval = resolution.unit->seconds();
    series_.resolution_ = resolution;
    declared_resolution_ = true;
    return *this;
}

std::vector<double> TimeSeries::Builder::order_payload(const DataPayload& payload) const {
    const auto& labels = series_.labels_;
    if (!payload.labeled()) {
        if (payload.size() != labels.size()) {
            throw Error(ErrorCode::label_mismatch,
                        fmt::format("payload has {} values, series expects {}", payload.size(), labels.size()));
        }
        return payload.values();
    }
    std::vector<std::string> missing;
    std::vector<std::string> extra;
    std::vector<double> ordered(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::find(payload.labels().begin(), payload.labels().end(), labels[i]);
        if (it == payload.labels().end()) {
            missing.push_back(labels[i]);
        } else {
            ordered[i] = payload.values()[static_cast<std::size_t>(it - payload.labels().begin())];
        }
    }
    for (const auto& label : payload.labels()) {
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) extra.push_back(label);
    }
    if (!missing.empty() || !extra.empty()) {
        throw Error(ErrorCode::label_mismatch,
                    fmt::format("label mismatch: missing [{}], unexpected [{}]", join(missing), join(extra)));
    }
    return ordered;
}

void TimeSeries::Builder::check_values(const std::vector<double>& values) const {
    if (values.size() != series_.labels_.size()) {
        throw Error(ErrorCode::label_mismatch,
                    fmt::format("element has {} values, series expects {}", values.size(), series_.labels_.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorCode::invalid_argument,
                        fmt::format("non-finite value for label '{}'", series_.labels_[i]));
        }
    }
}

TimeSeries::Builder& TimeSeries::Builder::append(const Element& element) {
    check_values(element.data);
    auto& elements = series_.elements_;
    if (series_.is_points()) {
        if (!elements.empty() && !(element.start > elements.back().start)) {
            throw Error(ErrorCode::ordering,
                        "point @ " + describe_time(element.start, series_.tz_) + " does not follow point @ " +
                            describe_time(elements.back().start, series_.tz_));
        }
        Element copy = element;
        copy.end = copy.start;
        elements.push_back(std::move(copy));
        return *this;
    }
    if (!elements.empty() && element.start != elements.back().end) {
        throw Error(ErrorCode::ordering,
                    "slot starting @ " + describe_time(element.start, series_.tz_) + " breaks succession: expected start @ " +
                        describe_time(elements.back().end, series_.tz_));
    }
    const Timestamp expected_end = shift(element.start, *series_.resolution_.unit, 1, series_.tz_);
    if (element.end != expected_end) {
        throw Error(ErrorCode::ordering,
                    "slot starting @ " + describe_time(element.start, series_.tz_) + " must end @ " +
                        describe_time(expected_end, series_.tz_) + " for unit " + series_.resolution_.unit->str());
    }
    elements.push_back(element);
    return *this;
}

TimeSeries::Builder& TimeSeries::Builder::append(const DataTimePoint& point) {
    if (!series_.is_points()) throw Error(ErrorCode::invalid_argument, "cannot append a point to a slot series");
    return append(Element{point.t, point.t, order_payload(point.data), point.indexes});
}

TimeSeries::Builder& TimeSeries::Builder::append(const DataTimeSlot& slot) {
    if (!series_.is_slots()) throw Error(ErrorCode::invalid_argument, "cannot append a slot to a point series");
    if (!(slot.unit == *series_.resolution_.unit)) {
        throw Error(ErrorCode::invalid_argument,
                    "slot unit " + slot.unit.str() + " differs from series unit " + series_.resolution_.unit->str());
    }
    return append(Element{slot.start, slot.end, order_payload(slot.data), slot.indexes});
}

TimeSeries::Builder& TimeSeries::Builder::append(Timestamp t, std::vector<double> values, DataIndexes indexes) {
    if (series_.is_points()) return append(Element{t, t, std::move(values), std::move(indexes)});
    const Timestamp end = shift(t, *series_.resolution_.unit, 1, series_.tz_);
    return append(Element{t, end, std::move(values), std::move(indexes)});
}

TimeSeries TimeSeries::Builder::build() && {
    if (series_.is_points() && !declared_resolution_) {
        if (series_.elements_.size() >= 2) {
            series_.resolution_ = detect_resolution(series_);
        } else {
            series_.resolution_ = Resolution{};
        }
    }
    return std::move(series_);
}

}  // namespace chronoseries
