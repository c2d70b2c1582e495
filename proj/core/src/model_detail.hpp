#pragma once

#include <vector>

#include "chronoseries/series.hpp"

namespace chronoseries::models::detail {

/// Maximal runs of elements whose data_loss is below 1.
std::vector<TimeSeries> valid_runs(const TimeSeries& series);

/// Timestamp of the element that would follow the last one of `series`.
Timestamp following(const TimeSeries& series);

}  // namespace chronoseries::models::detail
