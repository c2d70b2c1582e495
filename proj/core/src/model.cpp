#include "chronoseries/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/format.hpp"
#include "chronoseries/log.hpp"
#include "model_detail.hpp"

namespace chronoseries::models {

Metric parse_metric(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "RMSE") return Metric::RMSE;
    if (upper == "MAE") return Metric::MAE;
    if (upper == "MAPE") return Metric::MAPE;
    throw Error(ErrorCode::invalid_argument, fmt::format("unknown metric '{}' (expected RMSE, MAE or MAPE)", name));
}

std::string_view to_string(Metric metric) noexcept {
    switch (metric) {
    case Metric::RMSE: return "RMSE";
    case Metric::MAE: return "MAE";
    case Metric::MAPE: return "MAPE";
    }
    return "?";
}

// ------------------------------------------------------------------ registry

namespace {

struct RegistryState {
    std::mutex mutex;
    std::unordered_map<std::string, ModelRegistry::Factory> factories;
};

RegistryState& registry() {
    static RegistryState* state = [] {
        auto* s = new RegistryState;
        s->factories.emplace("periodic_average_forecaster", [] { return std::make_unique<PeriodicAverageForecaster>(); });
        s->factories.emplace("periodic_average_reconstructor",
                             [] { return std::make_unique<PeriodicAverageReconstructor>(); });
        s->factories.emplace("periodic_average_anomaly_detector",
                             [] { return std::make_unique<PeriodicAverageAnomalyDetector>(); });
        s->factories.emplace("model_based_anomaly_detector", [] { return std::make_unique<ModelBasedAnomalyDetector>(); });
        return s;
    }();
    return *state;
}

}  // namespace

void ModelRegistry::add(std::string kind, Factory factory) {
    auto& state = registry();
    std::lock_guard lock(state.mutex);
    state.factories[std::move(kind)] = std::move(factory);
}

std::unique_ptr<Model> ModelRegistry::create(std::string_view kind) {
    auto& state = registry();
    std::lock_guard lock(state.mutex);
    auto it = state.factories.find(std::string(kind));
    if (it == state.factories.end()) {
        throw Error(ErrorCode::model, fmt::format("unknown model kind '{}'; register it before loading", kind));
    }
    return it->second();
}

bool ModelRegistry::contains(std::string_view kind) {
    auto& state = registry();
    std::lock_guard lock(state.mutex);
    return state.factories.contains(std::string(kind));
}

// --------------------------------------------------------------------- model

void Model::require_fitted() const {
    if (!fitted_) throw Error(ErrorCode::not_fitted, fmt::format("{} is not fitted", kind()));
}

void Model::mark_fitted(const TimeSeries& series) {
    fit_info_.labels = series.labels();
    fit_info_.resolution = series.resolution().unit;
    fit_info_.tz = series.tz();
    fitted_ = true;
}

void Model::require_compatible(const TimeSeries& series) const {
    require_fitted();
    if (series.labels() != fit_info_.labels) {
        throw Error(ErrorCode::label_mismatch,
                    fmt::format("{} was fitted on labels [{}] but the series has [{}]", kind(),
                                fmt::join(fit_info_.labels, ", "), fmt::join(series.labels(), ", ")));
    }
}

ModelDocument Model::to_document() const {
    ModelDocument document;
    document["format"] = model_format_version;
    document["kind"] = kind();
    document["hyperparameters"] = hyperparameters();
    document["fitted"] = fitted_;
    if (fitted_) {
        ModelDocument fit;
        fit["labels"] = fit_info_.labels;
        fit["resolution"] = fit_info_.resolution ? fit_info_.resolution->str() : "variable";
        fit["tz"] = fit_info_.tz;
        document["fit"] = std::move(fit);
    }
    document["data"] = data_;
    write_extra(document);
    return document;
}

void Model::load_document(const ModelDocument& document) {
    set_hyperparameters(document.value("hyperparameters", ModelDocument::object()));
    fitted_ = document.value("fitted", false);
    if (fitted_) {
        const auto& fit = document.at("fit");
        fit_info_.labels = fit.at("labels").get<std::vector<std::string>>();
        const auto resolution = fit.at("resolution").get<std::string>();
        fit_info_.resolution = resolution == "variable" ? std::nullopt : std::optional(TimeUnit::parse(resolution));
        fit_info_.tz = fit.at("tz").get<std::string>();
    }
    data_ = document.value("data", ModelDocument::object());
    read_extra(document);
}

std::unique_ptr<Model> Model::from_document(const ModelDocument& document) {
    if (!document.is_object() || !document.contains("format")) {
        throw Error(ErrorCode::parse_error, "not a model document (missing \"format\")");
    }
    const auto format = document.at("format").get<std::string>();
    if (format != model_format_version) {
        throw Error(ErrorCode::version_mismatch,
                    fmt::format("unsupported model format '{}' (this build reads '{}')", format, model_format_version));
    }
    auto model = ModelRegistry::create(document.at("kind").get<std::string>());
    try {
        model->load_document(document);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, fmt::format("malformed {} document: {}", model->kind(), e.what()));
    }
    return model;
}

void Model::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path.string()));
    out << to_document().dump(2) << '\n';
    if (!out) throw Error(ErrorCode::io, fmt::format("error writing '{}'", path.string()));
}

std::unique_ptr<Model> Model::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, fmt::format("cannot read '{}'", path.string()));
    ModelDocument document;
    try {
        document = ModelDocument::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
    return from_document(document);
}

// ---------------------------------------------------------------- forecaster

std::vector<TimeSeries> detail::valid_runs(const TimeSeries& series) {
    std::vector<TimeSeries> runs;
    std::size_t i = 0;
    const std::size_t n = series.size();
    while (i < n) {
        while (i < n && series.elements()[i].data_loss() >= 1.0) ++i;
        std::size_t j = i;
        while (j < n && series.elements()[j].data_loss() < 1.0) ++j;
        if (j > i) runs.push_back(series.slice(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)));
        i = j;
    }
    return runs;
}

Timestamp detail::following(const TimeSeries& series) {
    const Element& last = series.elements().back();
    const auto& unit = series.resolution().unit;
    if (series.is_slots()) return last.end;
    if (unit) return shift(last.start, *unit, 1, series.tz());
    return last.start + series.auto_interval();
}

namespace {

using detail::valid_runs;
using detail::following;

std::vector<double> ordered(const ops::LabelValues& values, const std::vector<std::string>& labels) {
    std::vector<double> out;
    out.reserve(labels.size());
    for (const auto& label : labels) out.push_back(values.at(label));
    return out;
}

struct ErrorSums {
    double squared = 0.0;
    double absolute = 0.0;
    double percentage = 0.0;
    std::size_t count = 0;
    std::size_t nonzero = 0;
};

}  // namespace

void Forecaster::fit(const TimeSeries& series) {
    if (series.empty()) throw Error(ErrorCode::invalid_argument, fmt::format("cannot fit {} on an empty series", kind()));
    fit(valid_runs(series), series);
}

void Forecaster::fit(const std::vector<TimeSeries>& segments, const TimeSeries& shape) {
    if (window() == 0) throw Error(ErrorCode::invalid_argument, fmt::format("{} needs a window of at least 1", kind()));
    std::size_t total = 0;
    for (const auto& segment : segments) total += segment.size();
    if (total <= window()) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("{} needs more than {} valid elements to fit, got {}", kind(), window(), total));
    }
    data() = ModelDocument::object();
    fit_segments(segments);
    mark_fitted(shape);
}

void Forecaster::fit_segments(const std::vector<TimeSeries>& segments) {
    if (segments.front().is_slots()) {
        const auto longest = std::max_element(segments.begin(), segments.end(),
                                              [](const auto& a, const auto& b) { return a.size() < b.size(); });
        fit_series(*longest);
        return;
    }
    auto builder = TimeSeries::Builder::like(segments.front());
    for (const auto& segment : segments) {
        for (const auto& element : segment) builder.append(element);
    }
    fit_series(std::move(builder).build());
}

void Forecaster::fit_series(const TimeSeries& /*series*/) {
    throw Error(ErrorCode::model, fmt::format("{} implements neither fit_segments() nor fit_series()", kind()));
}

ops::LabelValues Forecaster::predict_one(const TimeSeries& context) const {
    ops::LabelValues prediction = predict_next(context);
    const auto& labels = fit_info().labels;
    bool matches = prediction.size() == labels.size();
    for (const auto& label : labels) matches = matches && prediction.contains(label);
    if (!matches) {
        std::vector<std::string> got;
        for (const auto& [label, value] : prediction) got.push_back(label);
        throw Error(ErrorCode::model, fmt::format("{} predicted labels [{}], expected [{}]", kind(), fmt::join(got, ", "),
                                                  fmt::join(labels, ", ")));
    }
    for (const auto& [label, value] : prediction) {
        if (!std::isfinite(value)) {
            throw Error(ErrorCode::model, fmt::format("{} predicted a non-finite value for '{}'", kind(), label));
        }
    }
    return prediction;
}

std::vector<ops::LabelValues> Forecaster::predict(const TimeSeries& series, std::size_t steps) const {
    require_compatible(series);
    const std::size_t w = window();
    if (series.size() < w) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("{} needs the last {} elements to predict, the series has {}", kind(), w, series.size()));
    }
    std::vector<ops::LabelValues> predictions;
    predictions.reserve(steps);
    TimeSeries context = series.slice(static_cast<std::ptrdiff_t>(series.size() - w), static_cast<std::ptrdiff_t>(series.size()));
    for (std::size_t step = 0; step < steps; ++step) {
        ops::LabelValues prediction = predict_one(context);
        if (step + 1 < steps) {
            auto builder = TimeSeries::Builder::like(context);
            for (std::size_t i = 1; i < context.size(); ++i) builder.append(context.elements()[i]);
            const Timestamp start = following(context);
            const Timestamp end = context.is_slots() ? shift(start, *context.resolution().unit, 1, context.tz()) : start;
            builder.append(Element{start, end, ordered(prediction, context.labels()), {}});
            context = std::move(builder).build();
        }
        predictions.push_back(std::move(prediction));
    }
    return predictions;
}

TimeSeries Forecaster::apply(const TimeSeries& series, std::size_t steps) const {
    const auto predictions = predict(series, steps);
    auto builder = TimeSeries::Builder::like(series);
    builder.reserve(series.size() + steps);
    for (const auto& element : series) builder.append(element);
    for (const auto& prediction : predictions) {
        const TimeSeries& sofar = builder.peek();
        const Timestamp start = following(sofar);
        const Timestamp end = sofar.is_slots() ? shift(start, *sofar.resolution().unit, 1, sofar.tz()) : start;
        DataIndexes indexes;
        indexes.set(index_names::forecast, 1.0);
        builder.append(Element{start, end, ordered(prediction, series.labels()), std::move(indexes)});
    }
    return std::move(builder).build();
}

EvaluationReport Forecaster::evaluate(const TimeSeries& series, const std::vector<Metric>& metrics) const {
    require_compatible(series);
    if (metrics.empty()) throw Error(ErrorCode::invalid_argument, "evaluate needs at least one metric");
    const std::size_t w = window();
    const auto& labels = series.labels();
    std::vector<ErrorSums> sums(labels.size());
    for (std::size_t i = w; i < series.size(); ++i) {
        const Element& actual = series.elements()[i];
        if (actual.data_loss() >= 1.0) continue;
        const auto prediction = predict_one(series.slice(static_cast<std::ptrdiff_t>(i - w), static_cast<std::ptrdiff_t>(i)));
        for (std::size_t k = 0; k < labels.size(); ++k) {
            const double a = actual.data[k];
            const double e = prediction.at(labels[k]) - a;
            sums[k].squared += e * e;
            sums[k].absolute += std::abs(e);
            sums[k].count += 1;
            if (a != 0.0) {
                sums[k].percentage += std::abs(e / a);
                sums[k].nonzero += 1;
            }
        }
    }
    if (sums.empty() || sums.front().count == 0) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("nothing to evaluate: the series has no valid element after a {}-element window", w));
    }
    EvaluationReport report;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const auto n = static_cast<double>(sums[k].count);
        for (Metric metric : metrics) {
            const std::string key = labels[k] + "_" + std::string(to_string(metric));
            switch (metric) {
            case Metric::RMSE: report[key] = std::sqrt(sums[k].squared / n); break;
            case Metric::MAE: report[key] = sums[k].absolute / n; break;
            case Metric::MAPE:
                if (sums[k].nonzero == 0) {
                    throw Error(ErrorCode::invalid_argument, fmt::format("MAPE is undefined for '{}': every actual value is zero", labels[k]));
                }
                report[key] = sums[k].percentage / static_cast<double>(sums[k].nonzero);
                break;
            }
        }
    }
    return report;
}

// ----------------------------------------------------------- cross-validation

std::vector<std::pair<std::size_t, std::size_t>> fold_bounds(std::size_t size, std::size_t rounds) {
    if (rounds < 2) throw Error(ErrorCode::invalid_argument, "cross-validation needs at least 2 rounds");
    if (size < rounds) {
        throw Error(ErrorCode::invalid_argument, fmt::format("cannot split {} elements into {} folds", size, rounds));
    }
    const std::size_t fold = size / rounds;
    std::vector<std::pair<std::size_t, std::size_t>> bounds;
    for (std::size_t r = 0; r < rounds; ++r) {
        bounds.emplace_back(r * fold, r + 1 == rounds ? size : (r + 1) * fold);
    }
    return bounds;
}

EvaluationReport cross_validate(const std::function<std::unique_ptr<Forecaster>()>& factory, const TimeSeries& series,
                                std::size_t rounds, const std::vector<Metric>& metrics) {
    const auto bounds = fold_bounds(series.size(), rounds);
    const std::size_t window = factory()->window();
    for (const auto& [from, to] : bounds) {
        if (to - from <= window) {
            throw Error(ErrorCode::invalid_argument,
                        fmt::format("cross-validation folds of {} elements are too short for a window of {}", to - from, window));
        }
    }
    std::map<std::string, std::vector<double>> results;
    for (std::size_t r = 0; r < bounds.size(); ++r) {
        const auto [from, to] = bounds[r];
        const TimeSeries fold = series.slice(static_cast<std::ptrdiff_t>(from), static_cast<std::ptrdiff_t>(to));
        const Timestamp first = fold.elements().front().start;
        const Timestamp last = to < series.size() ? series.elements()[to].start : following(fold);
        logger()->info("Cross validation round {}/{}: validate from {} ({}) to {} ({}), fit on the rest.", r + 1, rounds,
                       repr(first.epoch), format_timestamp(first, series.tz()), repr(last.epoch),
                       format_timestamp(last, series.tz()));

        std::vector<TimeSeries> rest;
        for (const auto& piece : {series.slice(0, static_cast<std::ptrdiff_t>(from)),
                                  series.slice(static_cast<std::ptrdiff_t>(to), static_cast<std::ptrdiff_t>(series.size()))}) {
            for (auto& run : valid_runs(piece)) rest.push_back(std::move(run));
        }
        auto model = factory();
        model->fit(rest, series);
        for (const auto& [key, value] : model->evaluate(fold, metrics)) results[key].push_back(value);
    }
    EvaluationReport report;
    for (const auto& [key, values] : results) {
        const double n = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double variance = 0.0;
        for (double v : values) variance += (v - mean) * (v - mean);
        report[key + "_avg"] = mean;
        report[key + "_stdev"] = std::sqrt(variance / n);
    }
    return report;
}

// ------------------------------------------------------------- reconstructor

void Reconstructor::fit(const TimeSeries& series) {
    if (series.empty()) throw Error(ErrorCode::invalid_argument, fmt::format("cannot fit {} on an empty series", kind()));
    if (window() == 0) throw Error(ErrorCode::invalid_argument, fmt::format("{} needs a window of at least 1", kind()));
    auto runs = valid_runs(series);
    if (runs.empty()) throw Error(ErrorCode::invalid_argument, fmt::format("{}: the series has no valid element", kind()));
    data() = ModelDocument::object();
    fit_segments(runs);
    mark_fitted(series);
}

TimeSeries Reconstructor::apply(const TimeSeries& series) const {
    require_compatible(series);
    const auto& elements = series.elements();
    const std::size_t n = elements.size();
    const std::size_t w = window();
    std::vector<Element> out(elements.begin(), elements.end());
    std::size_t filled = 0;

    std::size_t i = 0;
    while (i < n) {
        if (elements[i].data_loss() < 1.0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && elements[j].data_loss() >= 1.0) ++j;
        if (j == n) {
            logger()->warn("Not reconstructing the {} lost element(s) at the end of the series: no data after them", j - i);
            break;
        }
        Gap gap{i, j, {}, {}};
        for (std::size_t k = i; k-- > 0 && gap.before.size() < w;) {
            if (elements[k].data_loss() < 1.0) gap.before.push_back(k);
        }
        for (std::size_t k = j; k < n && gap.after.size() < w; ++k) {
            if (elements[k].data_loss() < 1.0) gap.after.push_back(k);
        }
        if (gap.before.size() < w) gap.before.clear();
        if (gap.after.size() < w) gap.after.clear();
        if (gap.before.empty() && gap.after.empty()) {
            logger()->warn("Not reconstructing the gap from {} to {}: fewer than {} valid elements on either side",
                              format_timestamp(elements[i].start, series.tz()), format_timestamp(elements[j - 1].start, series.tz()), w);
            i = j;
            continue;
        }
        const auto values = reconstruct(series, gap);
        if (values.size() != j - i) {
            throw Error(ErrorCode::model, fmt::format("{} returned {} values for a gap of {}", kind(), values.size(), j - i));
        }
        for (std::size_t k = i; k < j; ++k) {
            const auto& row = values[k - i];
            if (row.size() != series.labels().size()) {
                throw Error(ErrorCode::model, fmt::format("{} returned {} labels, expected {}", kind(), row.size(), series.labels().size()));
            }
            out[k].data = row;
            out[k].indexes.set(index_names::data_reconstructed, 1.0);
            ++filled;
        }
        i = j;
    }
    auto builder = TimeSeries::Builder::like(series);
    builder.reserve(n);
    for (auto& element : out) builder.append(std::move(element));
    logger()->info("Reconstructed {} elements", filled);
    return std::move(builder).build();
}

}  // namespace chronoseries::models
