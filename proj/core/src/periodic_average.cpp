#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/log.hpp"
#include "chronoseries/models.hpp"
#include "model_detail.hpp"

namespace chronoseries::models {

namespace {

void require_periodicity(std::size_t periodicity, std::string_view kind) {
    if (periodicity < 2) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("{} needs a periodicity of at least 2, got {}", kind, periodicity));
    }
}

ModelDocument periodic_hyperparameters(std::size_t periodicity, const std::optional<std::size_t>& window) {
    ModelDocument document;
    document["periodicity"] = periodicity;
    document["window"] = window ? ModelDocument(*window) : ModelDocument(nullptr);
    return document;
}

void read_periodic_hyperparameters(const ModelDocument& document, std::size_t& periodicity,
                                   std::optional<std::size_t>& window) {
    periodicity = document.at("periodicity").get<std::size_t>();
    const auto& w = document.at("window");
    window = w.is_null() ? std::nullopt : std::optional(w.get<std::size_t>());
}

std::optional<PeriodicProfile> read_profile(const ModelDocument& data) {
    if (!data.contains("profile")) return std::nullopt;
    return PeriodicProfile::from_document(data.at("profile"));
}

// Mean of (actual - periodic mean) over the given valid positions.
std::vector<double> offsets(const PeriodicProfile& profile, const TimeSeries& series, const std::vector<std::size_t>& positions) {
    const auto& labels = series.labels();
    std::vector<double> out(labels.size(), 0.0);
    if (positions.empty()) return out;
    for (std::size_t position : positions) {
        const Element& e = series.elements()[position];
        for (std::size_t k = 0; k < labels.size(); ++k) out[k] += e.data[k] - profile.mean(labels[k], e.start);
    }
    for (double& v : out) v /= static_cast<double>(positions.size());
    return out;
}

}  // namespace

// ------------------------------------------------------------------- profile

std::size_t PeriodicProfile::phase(Timestamp t) const {
    const std::int64_t steps = steps_between(origin, t, unit, tz);
    const auto p = static_cast<std::int64_t>(periodicity);
    return static_cast<std::size_t>(((steps % p) + p) % p);
}

PeriodicProfile PeriodicProfile::fit(const std::vector<TimeSeries>& segments, std::size_t periodicity) {
    if (segments.empty()) throw Error(ErrorCode::invalid_argument, "no valid data to fit a periodic profile on");
    const TimeSeries& first = segments.front();
    if (!first.resolution().unit) {
        throw Error(ErrorCode::invalid_argument,
                    "periodic averages need a fixed resolution; the series has variable resolution, resample it first");
    }
    std::size_t total = 0;
    for (const auto& segment : segments) total += segment.size();
    if (total < 2 * periodicity) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("periodic averages with periodicity {} need at least {} valid elements, got {}", periodicity,
                                2 * periodicity, total));
    }

    PeriodicProfile profile;
    profile.periodicity = periodicity;
    profile.origin = first.elements().front().start;
    profile.unit = *first.resolution().unit;
    profile.tz = first.tz();

    const auto& labels = first.labels();
    std::vector<std::vector<double>> sums(labels.size(), std::vector<double>(periodicity, 0.0));
    std::vector<std::size_t> counts(periodicity, 0);
    for (const auto& segment : segments) {
        for (const auto& e : segment) {
            const std::size_t phase = profile.phase(e.start);
            counts[phase] += 1;
            for (std::size_t k = 0; k < labels.size(); ++k) sums[k][phase] += e.data[k];
        }
    }
    for (std::size_t k = 0; k < labels.size(); ++k) {
        std::vector<double> means(periodicity);
        double overall = 0.0;
        for (std::size_t p = 0; p < periodicity; ++p) overall += sums[k][p];
        overall /= static_cast<double>(total);
        for (std::size_t p = 0; p < periodicity; ++p) {
            means[p] = counts[p] > 0 ? sums[k][p] / static_cast<double>(counts[p]) : overall;
        }
        profile.means.emplace(labels[k], std::move(means));
    }
    const auto empty = static_cast<std::size_t>(std::count(counts.begin(), counts.end(), std::size_t{0}));
    if (empty > 0) {
        logger()->warn("{} of {} phases have no valid data; using the overall mean for them", empty, periodicity);
    }
    return profile;
}

ModelDocument PeriodicProfile::to_document() const {
    ModelDocument document;
    document["periodicity"] = periodicity;
    document["origin"] = origin.epoch;
    document["unit"] = unit.str();
    document["tz"] = tz;
    ModelDocument m = ModelDocument::object();
    for (const auto& [label, values] : means) m[label] = values;
    document["means"] = std::move(m);
    return document;
}

PeriodicProfile PeriodicProfile::from_document(const ModelDocument& document) {
    PeriodicProfile profile;
    profile.periodicity = document.at("periodicity").get<std::size_t>();
    profile.origin = Timestamp{document.at("origin").get<double>()};
    profile.unit = TimeUnit::parse(document.at("unit").get<std::string>());
    profile.tz = document.at("tz").get<std::string>();
    for (const auto& [label, values] : document.at("means").items()) {
        auto means = values.get<std::vector<double>>();
        if (means.size() != profile.periodicity) {
            throw Error(ErrorCode::parse_error,
                        fmt::format("profile for '{}' has {} means, expected {}", label, means.size(), profile.periodicity));
        }
        profile.means.emplace(label, std::move(means));
    }
    return profile;
}

// ---------------------------------------------------------------- forecaster

PeriodicAverageForecaster::PeriodicAverageForecaster(std::size_t periodicity, std::optional<std::size_t> window)
    : periodicity_(periodicity), window_(window) {}

const PeriodicProfile& PeriodicAverageForecaster::profile() const {
    require_fitted();
    return *profile_;
}

ModelDocument PeriodicAverageForecaster::hyperparameters() const { return periodic_hyperparameters(periodicity_, window_); }

void PeriodicAverageForecaster::set_hyperparameters(const ModelDocument& document) {
    read_periodic_hyperparameters(document, periodicity_, window_);
}

void PeriodicAverageForecaster::fit_segments(const std::vector<TimeSeries>& segments) {
    require_periodicity(periodicity_, kind());
    profile_ = PeriodicProfile::fit(segments, periodicity_);
    data()["profile"] = profile_->to_document();
}

void PeriodicAverageForecaster::read_extra(const ModelDocument& /*document*/) { profile_ = read_profile(data()); }

ops::LabelValues PeriodicAverageForecaster::predict_next(const TimeSeries& context) const {
    const PeriodicProfile& p = *profile_;
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < context.size(); ++i) {
        if (context.elements()[i].data_loss() < 1.0) valid.push_back(i);
    }
    const auto offset = offsets(p, context, valid);
    const Timestamp next = detail::following(context);
    ops::LabelValues prediction;
    const auto& labels = context.labels();
    for (std::size_t k = 0; k < labels.size(); ++k) prediction.emplace(labels[k], p.mean(labels[k], next) + offset[k]);
    return prediction;
}

// ------------------------------------------------------------- reconstructor

PeriodicAverageReconstructor::PeriodicAverageReconstructor(std::size_t periodicity, std::optional<std::size_t> window)
    : periodicity_(periodicity), window_(window) {}

ModelDocument PeriodicAverageReconstructor::hyperparameters() const { return periodic_hyperparameters(periodicity_, window_); }

void PeriodicAverageReconstructor::set_hyperparameters(const ModelDocument& document) {
    read_periodic_hyperparameters(document, periodicity_, window_);
}

void PeriodicAverageReconstructor::fit_segments(const std::vector<TimeSeries>& segments) {
    require_periodicity(periodicity_, kind());
    profile_ = PeriodicProfile::fit(segments, periodicity_);
    data()["profile"] = profile_->to_document();
}

void PeriodicAverageReconstructor::read_extra(const ModelDocument& /*document*/) { profile_ = read_profile(data()); }

std::vector<std::vector<double>> PeriodicAverageReconstructor::reconstruct(const TimeSeries& series, const Gap& gap) const {
    const PeriodicProfile& p = *profile_;
    const auto& labels = series.labels();
    std::vector<double> offset(labels.size(), 0.0);
    int sides = 0;
    for (const auto* positions : {&gap.before, &gap.after}) {
        if (positions->empty()) continue;
        const auto side = offsets(p, series, *positions);
        for (std::size_t k = 0; k < labels.size(); ++k) offset[k] += side[k];
        ++sides;
    }
    for (double& v : offset) v /= sides;

    std::vector<std::vector<double>> values;
    values.reserve(gap.to - gap.from);
    for (std::size_t i = gap.from; i < gap.to; ++i) {
        const Timestamp t = series.elements()[i].start;
        std::vector<double> row(labels.size());
        for (std::size_t k = 0; k < labels.size(); ++k) row[k] = p.mean(labels[k], t) + offset[k];
        values.push_back(std::move(row));
    }
    return values;
}

// ------------------------------------------------------------------ detector

PeriodicAverageAnomalyDetector::PeriodicAverageAnomalyDetector(std::size_t periodicity, std::optional<std::size_t> window)
    : ModelBasedAnomalyDetector(std::make_unique<PeriodicAverageForecaster>(periodicity, window)) {}

// -------------------------------------------------------------- periodicity

std::size_t detect_periodicity(const TimeSeries& series, std::string_view label, std::size_t min_lag,
                               std::optional<std::size_t> max_lag) {
    const std::size_t column = series.label_position(label);
    const std::size_t n = series.size();
    const std::size_t upper = std::min(max_lag.value_or(n / 2), n > 2 ? n - 2 : 0);
    if (min_lag < 1 || upper < min_lag + 1) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("series of {} elements is too short to detect a periodicity of at least {}", n, min_lag));
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = series.elements()[i].data[column];
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double variance = 0.0;
    for (double& v : x) {
        v -= mean;
        variance += v * v;
    }
    if (!(variance > 0.0)) throw Error(ErrorCode::invalid_argument, fmt::format("'{}' is constant; no periodicity", label));

    std::vector<double> acf(upper + 2, 0.0);
    for (std::size_t lag = min_lag - 1; lag <= upper + 1 && lag < n; ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
        acf[lag] = s / variance;
    }
    std::optional<std::size_t> best;
    for (std::size_t lag = std::max<std::size_t>(min_lag, 1); lag <= upper; ++lag) {
        const bool peak = acf[lag] > acf[lag - 1] && acf[lag] >= acf[lag + 1] && acf[lag] > 0.0;
        if (peak && (!best || acf[lag] > acf[*best])) best = lag;
    }
    if (!best) throw Error(ErrorCode::invalid_argument, fmt::format("no periodicity found for '{}'", label));
    logger()->info("Detected periodicity {} for '{}'", *best, label);
    return *best;
}

}  // namespace chronoseries::models
