#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/log.hpp"
#include "chronoseries/models.hpp"

namespace chronoseries::models {

ModelBasedAnomalyDetector::ModelBasedAnomalyDetector(std::unique_ptr<Forecaster> model) : model_(std::move(model)) {}

const Forecaster& ModelBasedAnomalyDetector::model() const {
    if (!model_) throw Error(ErrorCode::model, fmt::format("{} has no underlying model", kind()));
    return *model_;
}

namespace {

// Calls `visit(position, prediction)` for every scored element: positions after
// the first full window whose data_loss is below 1.
template <typename Visit>
void scored(const Forecaster& model, const TimeSeries& series, Visit&& visit) {
    const std::size_t w = model.window();
    for (std::size_t i = w + 1; i < series.size(); ++i) {
        if (series.elements()[i].data_loss() >= 1.0) continue;
        visit(i, model.predict_one(series.slice(static_cast<std::ptrdiff_t>(i - w), static_cast<std::ptrdiff_t>(i))));
    }
}

}  // namespace

void ModelBasedAnomalyDetector::fit(const TimeSeries& series) {
    if (!model_) throw Error(ErrorCode::model, fmt::format("{} has no underlying model", kind()));
    model_->fit(series);
    logger()->info("Predictive model fitted, now evaluating the prediction errors");

    const auto& labels = series.labels();
    std::vector<std::vector<double>> errors(labels.size());
    scored(*model_, series, [&](std::size_t i, const ops::LabelValues& prediction) {
        const Element& e = series.elements()[i];
        for (std::size_t k = 0; k < labels.size(); ++k) errors[k].push_back(std::abs(e.data[k] - prediction.at(labels[k])));
    });
    if (errors.empty() || errors.front().empty()) {
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("{}: no element after the first {}-element window to build an error distribution",
                                kind(), model_->window()));
    }

    errors_.clear();
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const auto& values = errors[k];
        const double n = static_cast<double>(values.size());
        ErrorDistribution d;
        d.count = values.size();
        for (double v : values) d.mean += v;
        d.mean /= n;
        for (double v : values) d.stdev += (v - d.mean) * (v - d.mean);
        d.stdev = std::sqrt(d.stdev / n);
        d.max = *std::max_element(values.begin(), values.end());
        errors_.emplace(labels[k], d);
    }
    mark_fitted(series);
    logger()->info("Anomaly detector fitted on {} errors per label", errors.front().size());
}

double ModelBasedAnomalyDetector::index_for(std::string_view label, double error) const {
    const auto it = errors_.find(std::string(label));
    if (it == errors_.end()) throw Error(ErrorCode::not_found, fmt::format("no error distribution for '{}'", label));
    const ErrorDistribution& d = it->second;
    if (!(d.max > d.mean)) return error > d.mean ? 1.0 : 0.0;
    return std::clamp((error - d.mean) / (d.max - d.mean), 0.0, 1.0);
}

TimeSeries ModelBasedAnomalyDetector::apply(const TimeSeries& series) const {
    require_compatible(series);
    const std::size_t w = model_->window();
    const auto& labels = series.labels();
    auto builder = TimeSeries::Builder::like(series);
    if (series.size() > w + 1) builder.reserve(series.size() - w - 1);

    std::size_t next = w + 1;
    auto copy_until = [&](std::size_t end) {
        for (; next < end; ++next) builder.append(series.elements()[next]);
    };
    scored(*model_, series, [&](std::size_t i, const ops::LabelValues& prediction) {
        copy_until(i);
        Element e = series.elements()[i];
        double index = 0.0;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            index = std::max(index, index_for(labels[k], std::abs(e.data[k] - prediction.at(labels[k]))));
        }
        e.indexes.set(index_names::anomaly, index);
        builder.append(std::move(e));
        next = i + 1;
    });
    copy_until(series.size());
    return std::move(builder).build();
}

void ModelBasedAnomalyDetector::write_extra(ModelDocument& document) const {
    if (model_) document["model"] = model_->to_document();
    ModelDocument distribution = ModelDocument::object();
    for (const auto& [label, d] : errors_) {
        distribution[label] = {{"mean", d.mean}, {"max", d.max}, {"stdev", d.stdev}, {"count", d.count}};
    }
    document["error_distribution"] = std::move(distribution);
}

void ModelBasedAnomalyDetector::read_extra(const ModelDocument& document) {
    if (document.contains("model")) {
        auto model = Model::from_document(document.at("model"));
        auto* forecaster = dynamic_cast<Forecaster*>(model.get());
        if (forecaster == nullptr) {
            throw Error(ErrorCode::model, fmt::format("underlying model '{}' is not a forecaster", model->kind()));
        }
        model.release();
        model_.reset(forecaster);
    }
    errors_.clear();
    const ModelDocument distribution = document.value("error_distribution", ModelDocument::object());
    for (const auto& [label, d] : distribution.items()) {
        errors_.emplace(label, ErrorDistribution{d.at("mean").get<double>(), d.at("max").get<double>(),
                                                 d.at("stdev").get<double>(), d.at("count").get<std::size_t>()});
    }
}

}  // namespace chronoseries::models
