#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronoseries/ops.hpp"
#include "chronoseries/series.hpp"

namespace chronoseries::models {

/// Format tag written at the top of every saved model.
inline constexpr std::string_view model_format_version = "cs-model v1";

/// Ordered JSON document holding everything a model needs to be rebuilt.
using ModelDocument = nlohmann::ordered_json;

enum class Metric { RMSE, MAE, MAPE };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric metric) noexcept;

/// "<label>_<METRIC>" (evaluate) or "<label>_<METRIC>_avg|_stdev" (cross-validation).
using EvaluationReport = std::map<std::string, double>;

struct ErrorDistribution {
    double mean = 0.0;
    double max = 0.0;
    double stdev = 0.0;
    std::size_t count = 0;

    friend bool operator==(const ErrorDistribution&, const ErrorDistribution&) = default;
};

/// Shape of the data a model was fitted on.
struct FitInfo {
    std::vector<std::string> labels;
    std::optional<TimeUnit> resolution;
    std::string tz = "UTC";
};

/// Common state of every model: kind, fitted flag, fitted parameters and the
/// versioned save/load document.
class Model {
public:
    virtual ~Model() = default;

    /// Registry name, e.g. "periodic_average_forecaster".
    virtual std::string kind() const = 0;

    bool fitted() const noexcept { return fitted_; }
    const FitInfo& fit_info() const noexcept { return fit_info_; }

    /// Free-form fitted parameters. Custom models store whatever they need here
    /// and it is saved and loaded with the model.
    ModelDocument& data() noexcept { return data_; }
    const ModelDocument& data() const noexcept { return data_; }

    ModelDocument to_document() const;
    void save(const std::filesystem::path& path) const;

    /// Rebuild any registered model from a saved file.
    static std::unique_ptr<Model> load(const std::filesystem::path& path);
    static std::unique_ptr<Model> from_document(const ModelDocument& document);

protected:
    virtual ModelDocument hyperparameters() const { return ModelDocument::object(); }
    virtual void set_hyperparameters(const ModelDocument& /*document*/) {}
    virtual void write_extra(ModelDocument& /*document*/) const {}
    virtual void read_extra(const ModelDocument& /*document*/) {}

    void require_fitted() const;
    void mark_fitted(const TimeSeries& series);
    /// Throws unless `series` has the labels the model was fitted on.
    void require_compatible(const TimeSeries& series) const;

private:
    void load_document(const ModelDocument& document);

    bool fitted_ = false;
    FitInfo fit_info_;
    ModelDocument data_ = ModelDocument::object();
};

/// Factory registry used by Model::load(). Built-in kinds are pre-registered.
class ModelRegistry {
public:
    using Factory = std::function<std::unique_ptr<Model>()>;

    static void add(std::string kind, Factory factory);
    static std::unique_ptr<Model> create(std::string_view kind);
    static bool contains(std::string_view kind);
};

template <typename ModelType>
void register_model() {
    ModelRegistry::add(ModelType().kind(), [] { return std::make_unique<ModelType>(); });
}

/// Base for forecasters. Subclasses supply window(), fit_segments() (or fit
/// via the default) and predict_next(); the framework handles window checks,
/// data-loss exclusion, recursive multi-step prediction, apply, evaluate and
/// cross-validation.
class Forecaster : public Model {
public:
    /// Number of trailing elements predict_next() needs.
    virtual std::size_t window() const = 0;

    /// Fit on `series`, skipping elements whose data_loss is 1.
    void fit(const TimeSeries& series);
    /// Fit on several disjoint pieces of one series (cross-validation).
    void fit(const std::vector<TimeSeries>& segments, const TimeSeries& shape);

    /// Recursive n-step prediction past the end of `series`.
    std::vector<ops::LabelValues> predict(const TimeSeries& series, std::size_t steps = 1) const;

    /// `series` extended by `steps` predicted elements marked forecast = 1.
    TimeSeries apply(const TimeSeries& series, std::size_t steps = 1) const;

    /// One-step-ahead predictions against every element with a full window,
    /// skipping actuals whose data_loss is 1.
    EvaluationReport evaluate(const TimeSeries& series, const std::vector<Metric>& metrics = {Metric::RMSE, Metric::MAE}) const;

    /// Prediction for the element following `context`, which holds exactly
    /// window() elements. Checked against the fitted labels.
    ops::LabelValues predict_one(const TimeSeries& context) const;

protected:
    /// Receives the valid (data_loss < 1) runs of the fit series, in time order.
    /// The default concatenates point runs (or keeps the longest slot run) and
    /// calls fit_series().
    virtual void fit_segments(const std::vector<TimeSeries>& segments);
    virtual void fit_series(const TimeSeries& series);
    virtual ops::LabelValues predict_next(const TimeSeries& context) const = 0;
};

/// Runs `rounds` contiguous folds: each fold in turn is the validation segment
/// and a fresh model from `factory` is fitted on the remaining segments.
/// Folds are n/rounds elements long; the last one takes the remainder.
EvaluationReport cross_validate(const std::function<std::unique_ptr<Forecaster>()>& factory, const TimeSeries& series,
                                std::size_t rounds, const std::vector<Metric>& metrics = {Metric::RMSE, Metric::MAE});

/// Positions [begin, end) of each cross-validation fold.
std::vector<std::pair<std::size_t, std::size_t>> fold_bounds(std::size_t size, std::size_t rounds);

/// Overwrites gaps (maximal runs of data_loss == 1 followed by at least one
/// more element) with model values and marks them data_reconstructed = 1.
class Reconstructor : public Model {
public:
    virtual std::size_t window() const = 0;

    void fit(const TimeSeries& series);
    TimeSeries apply(const TimeSeries& series) const;

    struct Gap {
        std::size_t from;  ///< first lost element
        std::size_t to;    ///< one past the last lost element
        /// Positions of the `window()` nearest valid elements before/after the
        /// gap, nearest first; empty when not enough are available.
        std::vector<std::size_t> before;
        std::vector<std::size_t> after;
    };

protected:
    virtual void fit_segments(const std::vector<TimeSeries>& segments) = 0;
    /// Values for positions [gap.from, gap.to), in series label order.
    virtual std::vector<std::vector<double>> reconstruct(const TimeSeries& series, const Gap& gap) const = 0;
};

/// Scores elements by the absolute error of an underlying forecaster,
/// normalised with the fit-time error distribution:
/// index = clamp((e - mean) / (max - mean), 0, 1), maximum over labels.
class ModelBasedAnomalyDetector : public Model {
public:
    explicit ModelBasedAnomalyDetector(std::unique_ptr<Forecaster> model = nullptr);

    std::string kind() const override { return "model_based_anomaly_detector"; }

    void fit(const TimeSeries& series);
    /// Elements at positions <= window() have no scoring window and are not
    /// returned; elements with data_loss == 1 are returned without an anomaly index.
    TimeSeries apply(const TimeSeries& series) const;

    const Forecaster& model() const;
    const std::map<std::string, ErrorDistribution>& error_distribution() const noexcept { return errors_; }

    /// Anomaly index of a single absolute error for `label`.
    double index_for(std::string_view label, double error) const;

protected:
    void write_extra(ModelDocument& document) const override;
    void read_extra(const ModelDocument& document) override;

    std::unique_ptr<Forecaster> model_;

private:
    std::map<std::string, ErrorDistribution> errors_;
};

/// Convenience wrapper: an anomaly detector over a default-constructed ForecasterType.
template <typename ForecasterType>
class AnomalyDetectorOf : public ModelBasedAnomalyDetector {
public:
    AnomalyDetectorOf() : ModelBasedAnomalyDetector(std::make_unique<ForecasterType>()) {}
};

// ------------------------------------------------------------ periodic average

/// Per-phase means over a cycle of `periodicity` elements. Phases count unit
/// steps from the first fitted element. Stored in the model's data() under "profile".
struct PeriodicProfile {
    std::size_t periodicity = 0;
    Timestamp origin;
    TimeUnit unit{1, UnitKind::hours};
    std::string tz = "UTC";
    std::map<std::string, std::vector<double>> means;

    std::size_t phase(Timestamp t) const;
    double mean(const std::string& label, Timestamp t) const { return means.at(label)[phase(t)]; }

    static PeriodicProfile fit(const std::vector<TimeSeries>& segments, std::size_t periodicity);
    ModelDocument to_document() const;
    static PeriodicProfile from_document(const ModelDocument& document);
};

class PeriodicAverageForecaster : public Forecaster {
public:
    explicit PeriodicAverageForecaster(std::size_t periodicity = 0, std::optional<std::size_t> window = std::nullopt);

    std::string kind() const override { return "periodic_average_forecaster"; }
    std::size_t window() const override { return window_.value_or(periodicity_); }
    std::size_t periodicity() const noexcept { return periodicity_; }
    const PeriodicProfile& profile() const;

protected:
    ModelDocument hyperparameters() const override;
    void set_hyperparameters(const ModelDocument& document) override;
    void fit_segments(const std::vector<TimeSeries>& segments) override;
    ops::LabelValues predict_next(const TimeSeries& context) const override;
    void read_extra(const ModelDocument& document) override;

private:
    std::size_t periodicity_;
    std::optional<std::size_t> window_;
    std::optional<PeriodicProfile> profile_;
};

class PeriodicAverageReconstructor : public Reconstructor {
public:
    explicit PeriodicAverageReconstructor(std::size_t periodicity = 0, std::optional<std::size_t> window = std::nullopt);

    std::string kind() const override { return "periodic_average_reconstructor"; }
    std::size_t window() const override { return window_.value_or(periodicity_); }
    std::size_t periodicity() const noexcept { return periodicity_; }

protected:
    ModelDocument hyperparameters() const override;
    void set_hyperparameters(const ModelDocument& document) override;
    void fit_segments(const std::vector<TimeSeries>& segments) override;
    std::vector<std::vector<double>> reconstruct(const TimeSeries& series, const Gap& gap) const override;
    void read_extra(const ModelDocument& document) override;

private:
    std::size_t periodicity_;
    std::optional<std::size_t> window_;
    std::optional<PeriodicProfile> profile_;
};

class PeriodicAverageAnomalyDetector : public ModelBasedAnomalyDetector {
public:
    explicit PeriodicAverageAnomalyDetector(std::size_t periodicity = 0, std::optional<std::size_t> window = std::nullopt);

    std::string kind() const override { return "periodic_average_anomaly_detector"; }
};

/// Lag in [min_lag, max_lag] with the highest autocorrelation of `label`,
/// restricted to local peaks. Throws when no peak exists.
std::size_t detect_periodicity(const TimeSeries& series, std::string_view label, std::size_t min_lag = 2,
                               std::optional<std::size_t> max_lag = std::nullopt);

}  // namespace chronoseries::models
