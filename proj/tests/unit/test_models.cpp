#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include <doctest.h>
#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/models.hpp"
#include "test_support.hpp"

using namespace chronoseries;
using namespace chronoseries::models;
using namespace chronoseries::testing;

namespace {

TimeSeries noisy_periodic(std::size_t n, std::size_t period, std::uint64_t seed) {
    Rng rng(seed);
    const auto base = periodic_points(n, period, 3600.0, {"a", "b"});
    auto builder = TimeSeries::Builder::like(base);
    for (const auto& e : base) {
        Element copy = e;
        for (double& v : copy.data) v += uniform(rng, -1.0, 1.0);
        builder.append(copy);
    }
    return std::move(builder).build();
}

TimeSeries with_lost(const TimeSeries& series, const std::set<std::size_t>& positions, double garbage) {
    auto builder = TimeSeries::Builder::like(series);
    for (std::size_t i = 0; i < series.size(); ++i) {
        Element e = series.elements()[i];
        if (positions.count(i)) {
            for (double& v : e.data) v = garbage;
            e.indexes.set("data_loss", 1.0);
        }
        builder.append(e);
    }
    return std::move(builder).build();
}

std::filesystem::path temp_file(const char* name) { return std::filesystem::temp_directory_path() / name; }

// Repeats the last value: a minimal forecaster exercising the extension hooks.
class LastValueForecaster : public Forecaster {
public:
    std::string kind() const override { return "test_last_value"; }
    std::size_t window() const override { return 1; }

protected:
    void fit_series(const TimeSeries&) override {}
    ops::LabelValues predict_next(const TimeSeries& context) const override {
        ops::LabelValues out;
        for (std::size_t k = 0; k < context.labels().size(); ++k) out.emplace(context.labels()[k], context.at(-1).data[k]);
        return out;
    }
};

class BrokenForecaster : public Forecaster {
public:
    std::string kind() const override { return "test_broken"; }
    std::size_t window() const override { return 1; }

protected:
    void fit_series(const TimeSeries&) override {}
    ops::LabelValues predict_next(const TimeSeries&) const override { return {{"unexpected", 1.0}}; }
};

}  // namespace

TEST_CASE("periodic average forecaster is exact on periodic data") {
    const LogCapture log;
    const auto series = periodic_points(24 * 20, 24);
    PeriodicAverageForecaster model(24);
    model.fit(series);
    CHECK(model.fitted());
    CHECK(model.window() == 24);
    const auto report = model.evaluate(series, {Metric::RMSE, Metric::MAE, Metric::MAPE});
    CHECK(report.at("value_RMSE") == 0.0);
    CHECK(report.at("value_MAE") == 0.0);
    CHECK(report.at("value_MAPE") == 0.0);

    const auto future = periodic_points(24 * 20 + 30, 24);
    const auto predictions = model.predict(series, 30);
    REQUIRE(predictions.size() == 30);
    for (std::size_t s = 0; s < 30; ++s) CHECK(predictions[s].at("value") == future.elements()[24 * 20 + s].data[0]);

    const auto applied = model.apply(series, 5);
    REQUIRE(applied.size() == series.size() + 5);
    CHECK(applied.at(-1).start.epoch == series.at(-1).start.epoch + 5 * 3600.0);
    CHECK(applied.at(-1).indexes.get("forecast") == 1.0);
    CHECK_FALSE(applied.at(0).indexes.has("forecast"));
}

TEST_CASE("forecaster fit skips lost elements") {
    const LogCapture log;
    const auto clean = periodic_points(24 * 10, 24, 3600.0, {"a", "b"});
    const auto damaged = with_lost(clean, {5, 6, 7, 100, 101}, 1e6);
    PeriodicAverageForecaster model(24);
    model.fit(damaged);
    const auto report = model.evaluate(clean, {Metric::RMSE});
    CHECK(report.at("a_RMSE") == 0.0);
    CHECK(report.at("b_RMSE") == 0.0);
}

TEST_CASE("periodic reconstruction recovers removed elements exactly") {
    const LogCapture log;
    const auto clean = periodic_points(24 * 10, 24, 3600.0, {"a", "b"});
    for (const std::set<std::size_t>& lost : {std::set<std::size_t>{50}, std::set<std::size_t>{120, 121, 122, 123}}) {
        const auto damaged = with_lost(clean, lost, -999.0);
        PeriodicAverageReconstructor model(24);
        model.fit(damaged);
        const auto repaired = model.apply(damaged);
        REQUIRE(repaired.size() == clean.size());
        for (std::size_t i = 0; i < clean.size(); ++i) {
            CAPTURE(i);
            CHECK(repaired.elements()[i].data == clean.elements()[i].data);
            CHECK(repaired.elements()[i].indexes.has("data_reconstructed") == (lost.count(i) == 1));
        }
    }
    CHECK(log.contains("Reconstructed 4 elements"));
}

TEST_CASE("anomaly index properties") {
    const LogCapture log;
    const auto series = noisy_periodic(24 * 15, 24, 42);
    PeriodicAverageAnomalyDetector detector(24);
    detector.fit(series);
    const auto& distribution = detector.error_distribution();
    REQUIRE(distribution.size() == 2);

    for (const auto& [label, d] : distribution) {
        CHECK(d.max > d.mean);
        CHECK(detector.index_for(label, 0.0) == 0.0);
        CHECK(detector.index_for(label, d.max) == 1.0);
        CHECK(detector.index_for(label, d.max * 10.0) == 1.0);
        double previous = 0.0;
        for (int step = 0; step <= 200; ++step) {
            const double index = detector.index_for(label, d.max * 1.2 * step / 200.0);
            CHECK(index >= previous);
            previous = index;
        }
    }

    const auto scored = detector.apply(series);
    CHECK(scored.size() == series.size() - detector.model().window() - 1);
    CHECK(scored.at(0).start == series.at(static_cast<std::ptrdiff_t>(detector.model().window() + 1)).start);
    std::size_t ones = 0;
    for (const auto& e : scored) {
        const auto index = e.indexes.get("anomaly");
        REQUIRE(index);
        CHECK(*index >= 0.0);
        CHECK(*index <= 1.0);
        if (*index == 1.0) ++ones;
    }
    CHECK(ones >= 1);  // the element holding each label's maximum fit-time error

    // Find the element with the largest error for "a" and check it scores 1.
    const auto& model = detector.model();
    const std::size_t w = model.window();
    double worst = -1.0;
    std::size_t worst_at = 0;
    for (std::size_t i = w + 1; i < series.size(); ++i) {
        const auto prediction = model.predict_one(series.slice(static_cast<std::ptrdiff_t>(i - w), static_cast<std::ptrdiff_t>(i)));
        const double error = std::abs(series.elements()[i].data[0] - prediction.at("a"));
        if (error > worst) {
            worst = error;
            worst_at = i;
        }
    }
    CHECK(worst == distribution.at("a").max);
    CHECK(scored.at(series.at(static_cast<std::ptrdiff_t>(worst_at)).start).indexes.get("anomaly") == 1.0);
}

TEST_CASE("cross validation reports averaged metrics per label") {
    const LogCapture log;
    const auto series = noisy_periodic(24 * 12, 24, 7);
    const auto report = cross_validate([] { return std::make_unique<PeriodicAverageForecaster>(24); }, series, 4,
                                       {Metric::RMSE, Metric::MAE, Metric::MAPE});
    std::set<std::string> keys;
    for (const auto& [key, value] : report) {
        keys.insert(key);
        CHECK(std::isfinite(value));
        CHECK(value >= 0.0);
    }
    std::set<std::string> expected;
    for (const char* label : {"a", "b"}) {
        for (const char* metric : {"RMSE", "MAE", "MAPE"}) {
            expected.insert(fmt::format("{}_{}_avg", label, metric));
            expected.insert(fmt::format("{}_{}_stdev", label, metric));
        }
    }
    CHECK(keys == expected);
    CHECK(log.contains("Cross validation round 1/4: validate from "));
    CHECK(log.contains("Cross validation round 4/4: validate from "));
}

TEST_CASE("fold bounds cover the series") {
    CHECK(fold_bounds(10, 3) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 3}, {3, 6}, {6, 10}});
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const auto n = static_cast<std::size_t>(integer(rng, 2, 1000));
        const auto r = static_cast<std::size_t>(integer(rng, 2, static_cast<std::int64_t>(n)));
        const auto folds = fold_bounds(n, r);
        REQUIRE(folds.size() == r);
        CHECK(folds.front().first == 0);
        CHECK(folds.back().second == n);
        for (std::size_t k = 1; k < folds.size(); ++k) CHECK(folds[k].first == folds[k - 1].second);
    }
    CHECK_THROWS_AS(fold_bounds(10, 1), Error);
    CHECK_THROWS_AS(fold_bounds(3, 4), Error);
}

TEST_CASE("model save/load reproduces apply bit for bit") {
    const LogCapture log;
    const auto series = noisy_periodic(24 * 10, 24, 3);
    const auto path = temp_file("chronoseries_model_test.json");

    PeriodicAverageForecaster forecaster(24, 12);
    forecaster.fit(series);
    forecaster.save(path);
    auto loaded_forecaster = Model::load(path);
    CHECK(loaded_forecaster->kind() == "periodic_average_forecaster");
    CHECK(dynamic_cast<Forecaster&>(*loaded_forecaster).window() == 12);
    CHECK(dynamic_cast<Forecaster&>(*loaded_forecaster).apply(series, 10) == forecaster.apply(series, 10));

    const auto damaged = with_lost(series, {40, 41, 77}, 0.0);
    PeriodicAverageReconstructor reconstructor(24);
    reconstructor.fit(damaged);
    reconstructor.save(path);
    CHECK(dynamic_cast<Reconstructor&>(*Model::load(path)).apply(damaged) == reconstructor.apply(damaged));

    PeriodicAverageAnomalyDetector detector(24);
    detector.fit(series);
    detector.save(path);
    auto loaded_detector = Model::load(path);
    auto& typed = dynamic_cast<ModelBasedAnomalyDetector&>(*loaded_detector);
    CHECK(typed.error_distribution() == detector.error_distribution());
    CHECK(typed.apply(series) == detector.apply(series));
    CHECK(Model::from_document(detector.to_document())->to_document() == detector.to_document());
    std::filesystem::remove(path);
}

TEST_CASE("model errors") {
    const LogCapture log;
    const auto series = periodic_points(24 * 5, 24, 3600.0, {"a", "b"});
    PeriodicAverageForecaster unfitted(24);
    try {
        unfitted.apply(series);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::not_fitted);
    }
    PeriodicAverageForecaster model(24);
    model.fit(series);
    try {
        model.apply(series.select("a"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::label_mismatch);
    }
    CHECK_THROWS_AS(PeriodicAverageForecaster(1).fit(series), Error);
    CHECK_THROWS_AS(PeriodicAverageForecaster(24).fit(series.slice(0, 30)), Error);
    CHECK_THROWS_AS(ModelRegistry::create("no_such_model"), Error);
    CHECK_THROWS_AS(parse_metric("R2"), Error);

    ModelDocument doc = model.to_document();
    doc["format"] = "cs-model v999";
    CHECK_THROWS_AS(Model::from_document(doc), Error);
}

TEST_CASE("custom models plug into the registry") {
    const LogCapture log;
    register_model<LastValueForecaster>();
    CHECK(ModelRegistry::contains("test_last_value"));
    const auto series = periodic_points(50, 5);
    LastValueForecaster model;
    model.fit(series);
    const auto copy = Model::from_document(model.to_document());
    CHECK(copy->kind() == "test_last_value");
    CHECK(dynamic_cast<Forecaster&>(*copy).predict(series, 3).back().at("value") == series.at(-1).data[0]);
    ModelBasedAnomalyDetector detector(std::make_unique<LastValueForecaster>());
    detector.fit(series);
    CHECK(detector.apply(series).size() == series.size() - 2);

    BrokenForecaster broken;
    broken.fit(series);
    CHECK_THROWS_AS(broken.predict(series), Error);
}

TEST_CASE("periodicity detection") {
    const LogCapture log;
    CHECK(detect_periodicity(noisy_periodic(24 * 10, 24, 5), "a") == 24);
    CHECK(detect_periodicity(periodic_points(7 * 12, 7), "value") == 7);
    CHECK(log.contains("Detected periodicity 7 for 'value'"));
    auto flat = TimeSeries::Builder::points({"v"});
    for (int i = 0; i < 20; ++i) flat.append(Timestamp{60.0 * i}, {1.0});
    CHECK_THROWS_AS(detect_periodicity(std::move(flat).build(), "v"), Error);
}
