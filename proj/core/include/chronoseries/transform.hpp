#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "chronoseries/series.hpp"

namespace chronoseries {

/// How the part of a window not backed by source data is filled in.
enum class Interpolation {
    linear,   ///< straight line between the nearest source points on each side
    nearest,  ///< each half of a gap takes the value of the closer source point
};

Interpolation parse_interpolation(std::string_view name);

enum class AggregateOp { avg, min, max, sum };

AggregateOp parse_aggregate_op(std::string_view name);
std::string_view to_string(AggregateOp op) noexcept;

/// Time region a source point stands for: +-interval/2 around it, clipped at
/// the midpoint towards each neighbour.
struct ValidityRegion {
    double left;
    double right;
};

std::vector<ValidityRegion> validity_regions(const TimeSeries& points, double interval);

/// Resample a point series onto epoch multiples of a physical unit.
///
/// A target point at t stands for [t - T/2, t + T/2] and is produced only when
/// that window lies inside the span covered by the source validity regions.
/// Its value is the coverage-weighted mean of the overlapping source points,
/// with uncovered parts imputed by `interpolation`; data_loss is the uncovered
/// fraction (plus the data_loss carried by the covering points).
TimeSeries resample(const TimeSeries& series, const TimeUnit& unit,
                    Interpolation interpolation = Interpolation::linear);

/// Aggregate a point series into calendar-aligned slots of `unit` in the series
/// time zone. Only slots fully inside the covered span are produced.
/// Labels become "<label>_<op>" unless the only operation is avg.
TimeSeries aggregate(const TimeSeries& series, const TimeUnit& unit,
                     const std::vector<AggregateOp>& operations = {AggregateOp::avg},
                     Interpolation interpolation = Interpolation::linear);

struct IndexContribution {
    const DataIndexes* indexes;
    double overlap;
};

/// Overlap-weighted mean of every index defined by at least one source,
/// data_loss excluded (it comes from coverage).
DataIndexes carry_indexes(std::span<const IndexContribution> sources);

}  // namespace chronoseries
