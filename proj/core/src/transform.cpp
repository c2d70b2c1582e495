#include "chronoseries/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/format.hpp"
#include "chronoseries/log.hpp"

namespace chronoseries {

Interpolation parse_interpolation(std::string_view name) {
    if (name == "linear") return Interpolation::linear;
    if (name == "nearest") return Interpolation::nearest;
    throw Error(ErrorCode::invalid_argument, fmt::format("unknown interpolation method '{}' (expected linear or nearest)", name));
}

AggregateOp parse_aggregate_op(std::string_view name) {
    if (name == "avg") return AggregateOp::avg;
    if (name == "min") return AggregateOp::min;
    if (name == "max") return AggregateOp::max;
    if (name == "sum") return AggregateOp::sum;
    throw Error(ErrorCode::invalid_argument, fmt::format("unknown aggregation operation '{}' (expected avg, min, max or sum)", name));
}

std::string_view to_string(AggregateOp op) noexcept {
    switch (op) {
    case AggregateOp::avg: return "avg";
    case AggregateOp::min: return "min";
    case AggregateOp::max: return "max";
    case AggregateOp::sum: return "sum";
    }
    return "?";
}

std::vector<ValidityRegion> validity_regions(const TimeSeries& points, double interval) {
    const auto& elements = points.elements();
    const std::size_t n = elements.size();
    std::vector<ValidityRegion> regions(n);
    const double half = interval / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = elements[i].start.epoch;
        double left = t - half;
        double right = t + half;
        if (i > 0) left = std::max(left, (elements[i - 1].start.epoch + t) / 2.0);
        if (i + 1 < n) right = std::min(right, (t + elements[i + 1].start.epoch) / 2.0);
        regions[i] = ValidityRegion{left, right};
    }
    return regions;
}

DataIndexes carry_indexes(std::span<const IndexContribution> sources) {
    std::map<std::string, std::pair<double, double>, std::less<>> sums;  // name -> (weighted sum, weight)
    for (const auto& source : sources) {
        if (!(source.overlap > 0.0) || source.indexes == nullptr) continue;
        for (const auto& [name, value] : *source.indexes) {
            if (name == index_names::data_loss) continue;
            auto& entry = sums[name];
            entry.first += value * source.overlap;
            entry.second += source.overlap;
        }
    }
    DataIndexes out;
    for (const auto& [name, entry] : sums) {
        double mean = entry.first / entry.second;
        out.set(name, std::clamp(mean, 0.0, 1.0));
    }
    return out;
}

namespace {

struct WindowStats {
    std::vector<double> mean;
    std::vector<double> min;
    std::vector<double> max;
    double data_loss = 0.0;
    DataIndexes indexes;
};

// Sweeps increasing, non-overlapping windows over a point series.
class CoverageSweep {
public:
    CoverageSweep(const TimeSeries& series, double interval, Interpolation interpolation)
        : elements_(series.elements()),
          regions_(validity_regions(series, interval)),
          labels_(series.labels().size()),
          interpolation_(interpolation) {}

    double span_start() const { return regions_.front().left; }
    double span_end() const { return regions_.back().right; }

    WindowStats compute(double a, double b, bool extremes) {
        const double width = b - a;
        WindowStats stats;
        stats.mean.assign(labels_, 0.0);
        if (extremes) {
            stats.min.assign(labels_, std::numeric_limits<double>::infinity());
            stats.max.assign(labels_, -std::numeric_limits<double>::infinity());
        }
        while (cursor_ < regions_.size() && regions_[cursor_].right <= a) ++cursor_;

        double missing = 0.0;
        bool observed = false;
        contributions_.clear();
        std::size_t j = cursor_ > 0 ? cursor_ - 1 : 0;
        for (; j < regions_.size() && regions_[j].left < b; ++j) {
            const Element& e = elements_[j];
            const double overlap = std::min(b, regions_[j].right) - std::max(a, regions_[j].left);
            if (overlap > 0.0) {
                const double fraction = overlap / width;
                const double loss = e.data_loss();
                if (loss < 1.0) observed = true;
                missing += fraction * loss;
                for (std::size_t k = 0; k < labels_; ++k) {
                    stats.mean[k] += fraction * e.data[k];
                    if (extremes) {
                        stats.min[k] = std::min(stats.min[k], e.data[k]);
                        stats.max[k] = std::max(stats.max[k], e.data[k]);
                    }
                }
                contributions_.push_back(IndexContribution{&e.indexes, overlap});
            }
            if (j + 1 < regions_.size() && regions_[j].right < regions_[j + 1].left) {
                const double x = std::max(a, regions_[j].right);
                const double y = std::min(b, regions_[j + 1].left);
                if (y > x) {
                    const double fraction = (y - x) / width;
                    missing += fraction;
                    impute(j, x, y, fraction, stats, extremes);
                }
            }
        }
        stats.data_loss = observed ? std::clamp(missing, 0.0, 1.0) : 1.0;
        stats.indexes = carry_indexes(contributions_);
        stats.indexes.set(index_names::data_loss, stats.data_loss);
        return stats;
    }

private:
    // Adds the imputed contribution of gap (j, j+1) restricted to [x, y].
    void impute(std::size_t j, double x, double y, double fraction, WindowStats& stats, bool extremes) const {
        const Element& lo = elements_[j];
        const Element& hi = elements_[j + 1];
        const double t0 = lo.start.epoch;
        const double t1 = hi.start.epoch;
        for (std::size_t k = 0; k < labels_; ++k) {
            const double v0 = lo.data[k];
            const double v1 = hi.data[k];
            if (interpolation_ == Interpolation::linear) {
                auto at = [&](double u) { return v0 + (v1 - v0) * (u - t0) / (t1 - t0); };
                stats.mean[k] += fraction * at((x + y) / 2.0);
                if (extremes) {
                    const double ex = at(x);
                    const double ey = at(y);
                    stats.min[k] = std::min({stats.min[k], ex, ey});
                    stats.max[k] = std::max({stats.max[k], ex, ey});
                }
            } else {
                const double mid = (t0 + t1) / 2.0;
                const double left = std::max(0.0, std::min(y, mid) - x);
                const double right = std::max(0.0, y - std::max(x, mid));
                stats.mean[k] += fraction * (left * v0 + right * v1) / (y - x);
                if (extremes) {
                    if (left > 0.0) {
                        stats.min[k] = std::min(stats.min[k], v0);
                        stats.max[k] = std::max(stats.max[k], v0);
                    }
                    if (right > 0.0) {
                        stats.min[k] = std::min(stats.min[k], v1);
                        stats.max[k] = std::max(stats.max[k], v1);
                    }
                }
            }
        }
    }

    const std::vector<Element>& elements_;
    std::vector<ValidityRegion> regions_;
    std::size_t labels_;
    Interpolation interpolation_;
    std::size_t cursor_ = 0;
    std::vector<IndexContribution> contributions_;
};

void require_points(const TimeSeries& series, std::string_view what) {
    if (!series.is_points()) {
        throw Error(ErrorCode::invalid_argument, fmt::format("{} needs a point series; slot re-aggregation is not supported", what));
    }
    if (series.size() < 2) {
        throw Error(ErrorCode::invalid_argument, fmt::format("{} needs at least 2 points, got {}", what, series.size()));
    }
}

double sampling_interval(const TimeSeries& series) {
    const double interval = series.auto_interval();
    if (!(interval > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "series has no usable sampling interval");
    }
    logger()->info("Using auto-detected sampling interval: {}s", repr(interval));
    return interval;
}

}  // namespace

TimeSeries resample(const TimeSeries& series, const TimeUnit& unit, Interpolation interpolation) {
    if (unit.is_calendar()) {
        throw Error(ErrorCode::invalid_argument,
                    "cannot resample with calendar unit " + unit.str() + "; use aggregate() for calendar units");
    }
    require_points(series, "resample");
    const double interval = sampling_interval(series);
    const double width = unit.seconds();
    CoverageSweep sweep(series, interval, interpolation);

    const double first = std::ceil((sweep.span_start() + width / 2.0) / width);
    const double last = std::floor((sweep.span_end() - width / 2.0) / width);

    auto builder = TimeSeries::Builder::points(series.labels(), series.tz());
    builder.resolution(Resolution{unit, width});
    if (last >= first) builder.reserve(static_cast<std::size_t>(last - first + 1));
    for (double k = first; k <= last; k += 1.0) {
        const double t = k * width;
        WindowStats stats = sweep.compute(t - width / 2.0, t + width / 2.0, false);
        builder.append(Element{Timestamp{t}, Timestamp{t}, std::move(stats.mean), std::move(stats.indexes)});
    }
    TimeSeries out = std::move(builder).build();
    logger()->info("Resampled {} DataTimePoints in {} DataTimePoints", series.size(), out.size());
    return out;
}

TimeSeries aggregate(const TimeSeries& series, const TimeUnit& unit, const std::vector<AggregateOp>& operations,
                     Interpolation interpolation) {
    if (operations.empty()) throw Error(ErrorCode::invalid_argument, "aggregate needs at least one operation");
    require_points(series, "aggregate");
    const double interval = sampling_interval(series);
    CoverageSweep sweep(series, interval, interpolation);

    std::vector<std::string> labels;
    const bool plain = operations.size() == 1 && operations.front() == AggregateOp::avg;
    if (plain) {
        labels = series.labels();
    } else {
        for (AggregateOp op : operations) {
            for (const auto& label : series.labels()) labels.push_back(label + "_" + std::string(to_string(op)));
        }
    }
    const bool extremes = std::any_of(operations.begin(), operations.end(),
                                      [](AggregateOp op) { return op == AggregateOp::min || op == AggregateOp::max; });

    const std::string& tz = series.tz();
    auto builder = TimeSeries::Builder::slots(std::move(labels), unit, tz);
    const Timestamp span_start{sweep.span_start()};
    const Timestamp span_end{sweep.span_end()};
    Timestamp start = floor(span_start, unit, tz);
    if (start < span_start) start = shift(start, unit, 1, tz);
    while (true) {
        const Timestamp end = shift(start, unit, 1, tz);
        if (end > span_end) break;
        WindowStats stats = sweep.compute(start.epoch, end.epoch, extremes);
        std::vector<double> values;
        values.reserve(operations.size() * series.labels().size());
        for (AggregateOp op : operations) {
            for (std::size_t k = 0; k < series.labels().size(); ++k) {
                switch (op) {
                case AggregateOp::avg: values.push_back(stats.mean[k]); break;
                case AggregateOp::min: values.push_back(stats.min[k]); break;
                case AggregateOp::max: values.push_back(stats.max[k]); break;
                case AggregateOp::sum: values.push_back(stats.mean[k] * (end - start) / interval); break;
                }
            }
        }
        builder.append(Element{start, end, std::move(values), std::move(stats.indexes)});
        start = end;
    }
    TimeSeries out = std::move(builder).build();
    logger()->info("Aggregated {} points in {} slots", series.size(), out.size());
    return out;
}

}  // namespace chronoseries
