#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chronoseries/series.hpp"

namespace chronoseries::ops {

// Operations in this namespace never change resolution or element kind.

using LabelValues = std::map<std::string, double, std::less<>>;

LabelValues min(const TimeSeries& series);
LabelValues max(const TimeSeries& series);
/// Unweighted arithmetic mean over elements.
LabelValues avg(const TimeSeries& series);
LabelValues sum(const TimeSeries& series);

/// Successive differences; n-1 elements stamped from the second element on.
TimeSeries diff(const TimeSeries& series);
/// Running sum; n elements.
TimeSeries csum(const TimeSeries& series);
/// diff() divided by the actual elapsed seconds between elements.
TimeSeries derivative(const TimeSeries& series);
/// Running trapezoidal integral over elapsed seconds, starting at 0.
TimeSeries integral(const TimeSeries& series);

/// Per label (v - min) / (max - min); throws for a constant label.
TimeSeries normalize(const TimeSeries& series);
TimeSeries offset(const TimeSeries& series, double amount);
TimeSeries offset(const TimeSeries& series, const LabelValues& amounts);
TimeSeries rescale(const TimeSeries& series, double factor);
TimeSeries rescale(const TimeSeries& series, const LabelValues& factors);

/// Trailing moving average; n - window + 1 elements, the first stamped at the
/// window-th element.
TimeSeries mavg(const TimeSeries& series, std::size_t window);

/// Join series sharing kind, resolution, tz and timestamps over the common
/// time range. Labels must be disjoint. data_loss becomes the max over inputs;
/// other indexes are kept as-is where all inputs agree and otherwise split
/// into "<index>_<labels of the origin series>".
TimeSeries merge(const std::vector<TimeSeries>& series);

TimeSeries filter(const TimeSeries& series, const std::vector<std::string>& labels);
TimeSeries slice(const TimeSeries& series, Timestamp from, Timestamp to);
TimeSeries slice(const TimeSeries& series, std::ptrdiff_t from, std::ptrdiff_t to);

}  // namespace chronoseries::ops
