#include "chronoseries/ops.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "chronoseries/error.hpp"

namespace chronoseries::ops {

namespace {

void require_nonempty(const TimeSeries& series, std::string_view what) {
    if (series.empty()) throw Error(ErrorCode::invalid_argument, fmt::format("{} of an empty series", what));
}

void require_length(const TimeSeries& series, std::size_t n, std::string_view what) {
    if (series.size() < n) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("{} needs at least {} elements, got {}", what, n, series.size()));
    }
}

void require_fixed_resolution(const TimeSeries& series, std::string_view what) {
    if (series.variable_resolution()) {
        throw Error(ErrorCode::invalid_argument, fmt::format("{} needs a fixed-resolution series", what));
    }
}

template <typename Reduce>
LabelValues reduce(const TimeSeries& series, std::string_view what, Reduce reducer) {
    require_nonempty(series, what);
    LabelValues out;
    for (std::size_t k = 0; k < series.labels().size(); ++k) {
        double acc = series.elements().front().data[k];
        for (std::size_t i = 1; i < series.size(); ++i) acc = reducer(acc, series.elements()[i].data[k]);
        out.emplace(series.labels()[k], acc);
    }
    return out;
}

template <typename Fn>
TimeSeries map_values(const TimeSeries& series, Fn fn) {
    auto builder = TimeSeries::Builder::like(series);
    builder.reserve(series.size());
    for (const auto& e : series) {
        Element out = e;
        for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = fn(k, out.data[k]);
        builder.append(out);
    }
    return std::move(builder).build();
}

std::vector<double> per_label(const TimeSeries& series, const LabelValues& values, std::string_view what) {
    std::vector<double> out;
    for (const auto& label : series.labels()) {
        auto it = values.find(label);
        if (it == values.end()) {
            throw Error(ErrorCode::not_found, fmt::format("{}: no value given for label '{}'", what, label));
        }
        out.push_back(it->second);
    }
    for (const auto& [label, value] : values) series.label_position(label);
    return out;
}

std::string joined(const std::vector<std::string>& items, std::string_view separator) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += separator;
        out += item;
    }
    return out;
}

}  // namespace

LabelValues min(const TimeSeries& series) {
    return reduce(series, "min", [](double a, double b) { return std::min(a, b); });
}

LabelValues max(const TimeSeries& series) {
    return reduce(series, "max", [](double a, double b) { return std::max(a, b); });
}

LabelValues sum(const TimeSeries& series) {
    return reduce(series, "sum", [](double a, double b) { return a + b; });
}

LabelValues avg(const TimeSeries& series) {
    LabelValues totals = sum(series);
    for (auto& [label, value] : totals) value /= static_cast<double>(series.size());
    return totals;
}

TimeSeries diff(const TimeSeries& series) {
    require_length(series, 2, "diff");
    auto builder = TimeSeries::Builder::like(series);
    const auto& elements = series.elements();
    for (std::size_t i = 1; i < elements.size(); ++i) {
        Element out = elements[i];
        for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = elements[i].data[k] - elements[i - 1].data[k];
        builder.append(out);
    }
    return std::move(builder).build();
}

TimeSeries csum(const TimeSeries& series) {
    require_length(series, 2, "csum");
    std::vector<double> running(series.labels().size(), 0.0);
    return map_values(series, [&running](std::size_t k, double v) { return running[k] += v; });
}

TimeSeries derivative(const TimeSeries& series) {
    require_length(series, 2, "derivative");
    require_fixed_resolution(series, "derivative");
    auto builder = TimeSeries::Builder::like(series);
    const auto& elements = series.elements();
    for (std::size_t i = 1; i < elements.size(); ++i) {
        const double elapsed = elements[i].start - elements[i - 1].start;
        Element out = elements[i];
        for (std::size_t k = 0; k < out.data.size(); ++k) {
            out.data[k] = (elements[i].data[k] - elements[i - 1].data[k]) / elapsed;
        }
        builder.append(out);
    }
    return std::move(builder).build();
}

TimeSeries integral(const TimeSeries& series) {
    require_length(series, 2, "integral");
    require_fixed_resolution(series, "integral");
    auto builder = TimeSeries::Builder::like(series);
    const auto& elements = series.elements();
    std::vector<double> running(series.labels().size(), 0.0);
    for (std::size_t i = 0; i < elements.size(); ++i) {
        Element out = elements[i];
        if (i > 0) {
            const double elapsed = elements[i].start - elements[i - 1].start;
            for (std::size_t k = 0; k < running.size(); ++k) {
                running[k] += (elements[i - 1].data[k] + elements[i].data[k]) / 2.0 * elapsed;
            }
        }
        out.data = running;
        builder.append(out);
    }
    return std::move(builder).build();
}

TimeSeries normalize(const TimeSeries& series) {
    require_nonempty(series, "normalize");
    const LabelValues lows = min(series);
    const LabelValues highs = max(series);
    std::vector<double> low;
    std::vector<double> range;
    for (const auto& label : series.labels()) {
        const double lo = lows.find(label)->second;
        const double hi = highs.find(label)->second;
        if (hi == lo) {
            throw Error(ErrorCode::invalid_argument, fmt::format("cannot normalize constant label '{}'", label));
        }
        low.push_back(lo);
        range.push_back(hi - lo);
    }
    return map_values(series, [&](std::size_t k, double v) { return (v - low[k]) / range[k]; });
}

TimeSeries offset(const TimeSeries& series, double amount) {
    if (!std::isfinite(amount)) throw Error(ErrorCode::invalid_argument, "offset must be finite");
    return map_values(series, [amount](std::size_t, double v) { return v + amount; });
}

TimeSeries offset(const TimeSeries& series, const LabelValues& amounts) {
    const std::vector<double> by_label = per_label(series, amounts, "offset");
    return map_values(series, [&by_label](std::size_t k, double v) { return v + by_label[k]; });
}

TimeSeries rescale(const TimeSeries& series, double factor) {
    if (!std::isfinite(factor)) throw Error(ErrorCode::invalid_argument, "rescale factor must be finite");
    return map_values(series, [factor](std::size_t, double v) { return v * factor; });
}

TimeSeries rescale(const TimeSeries& series, const LabelValues& factors) {
    const std::vector<double> by_label = per_label(series, factors, "rescale");
    return map_values(series, [&by_label](std::size_t k, double v) { return v * by_label[k]; });
}

TimeSeries mavg(const TimeSeries& series, std::size_t window) {
    if (window == 0 || window > series.size()) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("moving average window {} invalid for a series of {} elements", window, series.size()));
    }
    auto builder = TimeSeries::Builder::like(series);
    const auto& elements = series.elements();
    const std::size_t labels = series.labels().size();
    for (std::size_t i = window - 1; i < elements.size(); ++i) {
        Element out = elements[i];
        for (std::size_t k = 0; k < labels; ++k) {
            double total = 0.0;
            for (std::size_t j = i + 1 - window; j <= i; ++j) total += elements[j].data[k];
            out.data[k] = total / static_cast<double>(window);
        }
        builder.append(out);
    }
    return std::move(builder).build();
}

TimeSeries merge(const std::vector<TimeSeries>& inputs) {
    if (inputs.size() < 2) throw Error(ErrorCode::invalid_argument, "merge needs at least two series");
    const TimeSeries& first = inputs.front();
    std::vector<std::string> labels;
    std::set<std::string> seen;
    std::vector<std::string> duplicates;
    for (const auto& s : inputs) {
        if (s.kind() != first.kind()) throw Error(ErrorCode::invalid_argument, "cannot merge points with slots");
        if (!(s.resolution().unit == first.resolution().unit)) {
            throw Error(ErrorCode::invalid_argument, "cannot merge series with different resolutions");
        }
        if (s.tz() != first.tz()) throw Error(ErrorCode::invalid_argument, "cannot merge series in different time zones");
        if (s.empty()) throw Error(ErrorCode::invalid_argument, "cannot merge an empty series");
        for (const auto& label : s.labels()) {
            if (!seen.insert(label).second) duplicates.push_back(label);
            labels.push_back(label);
        }
    }
    if (!duplicates.empty()) {
        throw Error(ErrorCode::label_mismatch, "cannot merge series sharing labels: " + joined(duplicates, ", "));
    }

    Timestamp from = first.elements().front().start;
    Timestamp to = first.elements().back().start;
    for (const auto& s : inputs) {
        from = std::max(from, s.elements().front().start);
        to = std::min(to, s.elements().back().start);
    }
    if (to < from) throw Error(ErrorCode::invalid_argument, "merged series do not overlap in time");

    std::vector<TimeSeries> parts;
    for (const auto& s : inputs) {
        const auto& elements = s.elements();
        auto lo = std::lower_bound(elements.begin(), elements.end(), from,
                                   [](const Element& e, Timestamp t) { return e.start < t; });
        auto hi = std::upper_bound(lo, elements.end(), to, [](Timestamp t, const Element& e) { return t < e.start; });
        parts.push_back(s.slice(lo - elements.begin(), hi - elements.begin()));
    }
    const std::size_t n = parts.front().size();
    for (const auto& p : parts) {
        if (p.size() != n) throw Error(ErrorCode::invalid_argument, "merged series do not share the same time grid");
        for (std::size_t i = 0; i < n; ++i) {
            if (p.elements()[i].start != parts.front().elements()[i].start) {
                throw Error(ErrorCode::invalid_argument, "merged series do not share the same time grid");
            }
        }
    }

    std::set<std::string> index_set;
    for (const auto& p : parts) {
        for (const auto& name : p.index_names()) index_set.insert(name);
    }
    std::set<std::string> divergent;
    for (const auto& name : index_set) {
        if (name == index_names::data_loss) continue;
        for (std::size_t i = 0; i < n && !divergent.contains(name); ++i) {
            std::optional<double> agreed;
            for (const auto& p : parts) {
                const auto v = p.elements()[i].indexes.get(name);
                if (!v) continue;
                if (agreed && *agreed != *v) {
                    divergent.insert(name);
                    break;
                }
                agreed = v;
            }
        }
    }

    auto builder = first.is_points() ? TimeSeries::Builder::points(labels, first.tz())
                                     : TimeSeries::Builder::slots(labels, *first.resolution().unit, first.tz());
    if (first.is_points()) builder.resolution(first.resolution());
    for (std::size_t i = 0; i < n; ++i) {
        Element out;
        out.start = parts.front().elements()[i].start;
        out.end = parts.front().elements()[i].end;
        for (const auto& p : parts) {
            const Element& e = p.elements()[i];
            out.data.insert(out.data.end(), e.data.begin(), e.data.end());
            for (const auto& [name, value] : e.indexes) {
                if (name == index_names::data_loss) {
                    out.indexes.set(name, std::max(value, out.indexes.get(name).value_or(0.0)));
                } else if (divergent.contains(name)) {
                    out.indexes.set(name + "_" + joined(p.labels(), "+"), value);
                } else {
                    out.indexes.set(name, value);
                }
            }
        }
        builder.append(out);
    }
    return std::move(builder).build();
}

TimeSeries filter(const TimeSeries& series, const std::vector<std::string>& labels) {
    if (labels.empty()) throw Error(ErrorCode::invalid_argument, "filter needs at least one label");
    std::vector<std::size_t> columns;
    for (const auto& label : labels) columns.push_back(series.label_position(label));
    auto builder = series.is_points() ? TimeSeries::Builder::points(labels, series.tz())
                                      : TimeSeries::Builder::slots(labels, *series.resolution().unit, series.tz());
    if (series.is_points()) builder.resolution(series.resolution());
    builder.reserve(series.size());
    for (const auto& e : series) {
        Element out{e.start, e.end, {}, e.indexes};
        for (std::size_t c : columns) out.data.push_back(e.data[c]);
        builder.append(out);
    }
    return std::move(builder).build();
}

TimeSeries slice(const TimeSeries& series, Timestamp from, Timestamp to) { return series.slice(from, to); }

TimeSeries slice(const TimeSeries& series, std::ptrdiff_t from, std::ptrdiff_t to) {
    return series.slice(from, to);
}

}  // namespace chronoseries::ops
