#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/format.hpp"
#include "chronoseries/io.hpp"
#include "chronoseries/log.hpp"
#include "chronoseries/models.hpp"
#include "chronoseries/ops.hpp"
#include "chronoseries/plot.hpp"
#include "chronoseries/series.hpp"
#include "chronoseries/transform.hpp"

namespace chronoseries::cli {

namespace {

namespace fs = std::filesystem;

struct InputOptions {
    std::string path;
    std::string separator;
    std::vector<std::string> timestamp_columns;
    std::string timestamp_format;
    std::string encoding;
    std::string input_tz;
    std::vector<std::string> labels;
    std::string tz;
};

struct OutputOptions {
    std::string path;
    std::string format;
};

struct ModelOptions {
    std::string model = "periodic-average";
    std::string periodicity;
    std::optional<std::size_t> window;
    std::string fit_save;
    std::string model_file;
};

class Context {
public:
    Context(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

    TimeSeries load(const InputOptions& options) {
        std::string bytes;
        if (options.path == "-") {
            bytes.assign(std::istreambuf_iterator<char>(in_), std::istreambuf_iterator<char>());
        } else {
            bytes = io::read_file(options.path);
        }
        io::CsvOptions csv;
        if (!options.separator.empty()) {
            const std::string sep = options.separator == "\\t" || options.separator == "tab" ? "\t" : options.separator;
            if (sep.size() != 1) throw Error(ErrorCode::invalid_argument, "--separator must be a single character");
            csv.separator = sep[0];
        }
        csv.timestamp_columns = options.timestamp_columns;
        if (!options.timestamp_format.empty()) csv.timestamp_format = options.timestamp_format;
        if (!options.encoding.empty()) csv.encoding = options.encoding;
        if (!options.input_tz.empty()) csv.tz = options.input_tz;
        csv.labels = options.labels;
        TimeSeries series;
        try {
            series = io::read_any(bytes, csv);
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("{}: {}", options.path == "-" ? "<stdin>" : options.path, e.what()));
        }
        if (!options.tz.empty()) series = series.change_tz(options.tz);
        return series;
    }

    // Writes atomically: the target only appears once fully written.
    void write(const OutputOptions& options, std::string_view content) {
        if (options.path.empty() || options.path == "-") {
            out_ << content;
            out_.flush();
            if (!out_) throw Error(ErrorCode::io, "error writing to standard output");
            return;
        }
        const fs::path target(options.path);
        fs::path temporary = target;
        temporary += ".partial";
        io::write_file(temporary, content);
        std::error_code ec;
        fs::rename(temporary, target, ec);
        if (ec) {
            fs::remove(temporary, ec);
            throw Error(ErrorCode::io, fmt::format("cannot write '{}'", options.path));
        }
    }

    void write_series(const OutputOptions& options, const TimeSeries& series) {
        write(options, options.format == "csv" ? io::write_csv(series) : io::write_native(series));
    }

    std::ostream& out() { return out_; }

private:
    std::istream& in_;
    std::ostream& out_;
};

void add_input(CLI::App* command, InputOptions& options) {
    command->add_option("input", options.path, "Input file (CSV or native format; '-' for stdin)")->required();
    command->add_option("--separator", options.separator, "CSV field separator (',', ';', 'tab')");
    command->add_option("--timestamp-column", options.timestamp_columns, "CSV timestamp column(s) by name or position");
    command->add_option("--timestamp-format", options.timestamp_format, "CSV timestamp format: epoch, iso8601 or a %Y-%m-%d pattern");
    command->add_option("--encoding", options.encoding, "CSV encoding: utf-8, utf-16, latin-1");
    command->add_option("--input-tz", options.input_tz, "Zone for CSV timestamps without an offset (default UTC)");
    command->add_option("--labels", options.labels, "Replacement labels for the CSV value columns")->delimiter(',');
    command->add_option("--tz", options.tz, "Move the series to this IANA time zone before processing");
}

void add_output(CLI::App* command, OutputOptions& options, std::string default_format = "native") {
    options.format = std::move(default_format);
    command->add_option("--out,-o", options.path, "Output file ('-' or omitted for stdout)");
    command->add_option("--format", options.format, "Output format")->check(CLI::IsMember({"native", "csv"}));
}

void add_model(CLI::App* command, ModelOptions& options) {
    command->add_option("--model", options.model, "Model family")->check(CLI::IsMember({"periodic-average"}));
    command->add_option("--periodicity", options.periodicity, "Cycle length in elements, or 'auto'");
    command->add_option("--window", options.window, "Trailing window length (default: the periodicity)");
    command->add_option("--fit-save", options.fit_save, "Save the fitted model to this file");
    command->add_option("--model-file", options.model_file, "Use a previously saved model instead of fitting");
}

std::size_t periodicity(const ModelOptions& options, const TimeSeries& series) {
    if (options.periodicity.empty()) {
        throw Error(ErrorCode::invalid_argument, "--periodicity is required when fitting (a number or 'auto')");
    }
    if (options.periodicity == "auto") return models::detect_periodicity(series, series.labels().front());
    auto value = parse_double(options.periodicity);
    if (!value || *value < 2 || *value != static_cast<double>(static_cast<std::size_t>(*value))) {
        throw Error(ErrorCode::invalid_argument, fmt::format("--periodicity must be an integer >= 2 or 'auto', got '{}'", options.periodicity));
    }
    return static_cast<std::size_t>(*value);
}

template <typename ModelType>
std::unique_ptr<ModelType> load_model(const std::string& path) {
    auto model = models::Model::load(path);
    if (auto* typed = dynamic_cast<ModelType*>(model.get())) {
        model.release();
        return std::unique_ptr<ModelType>(typed);
    }
    throw Error(ErrorCode::model, fmt::format("'{}' holds a {} model, which cannot be used here", path, model->kind()));
}

std::vector<std::string> split(std::string_view text, char separator) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = text.find(separator, start);
        parts.emplace_back(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return parts;
}

double number_argument(std::string_view op, std::string_view text) {
    auto value = parse_double(text);
    if (!value) throw Error(ErrorCode::invalid_argument, fmt::format("{}: '{}' is not a number", op, text));
    return *value;
}

TimeSeries apply_operation(const TimeSeries& series, const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string argument = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    auto need = [&](bool wanted) {
        if (wanted && argument.empty()) throw Error(ErrorCode::invalid_argument, fmt::format("operation '{}' needs an argument ({}:<value>)", name, name));
        if (!wanted && !argument.empty()) throw Error(ErrorCode::invalid_argument, fmt::format("operation '{}' takes no argument", name));
    };
    if (name == "normalize") return need(false), ops::normalize(series);
    if (name == "diff") return need(false), ops::diff(series);
    if (name == "csum") return need(false), ops::csum(series);
    if (name == "derivative") return need(false), ops::derivative(series);
    if (name == "integral") return need(false), ops::integral(series);
    if (name == "mavg") {
        need(true);
        const double window = number_argument(name, argument);
        if (window < 1 || window != static_cast<double>(static_cast<std::size_t>(window))) {
            throw Error(ErrorCode::invalid_argument, "mavg window must be a positive integer");
        }
        return ops::mavg(series, static_cast<std::size_t>(window));
    }
    if (name == "offset") return need(true), ops::offset(series, number_argument(name, argument));
    if (name == "rescale") return need(true), ops::rescale(series, number_argument(name, argument));
    if (name == "filter") return need(true), ops::filter(series, split(argument, '+'));
    throw Error(ErrorCode::invalid_argument,
                fmt::format("unknown operation '{}' (normalize, diff, csum, derivative, integral, mavg:N, offset:X, rescale:X, filter:a+b)", name));
}

spdlog::level::level_enum parse_level(const std::string& name) {
    const auto level = spdlog::level::from_str(name == "warning" ? "warn" : name);
    if (level == spdlog::level::off && name != "off") {
        throw Error(ErrorCode::invalid_argument, fmt::format("unknown log level '{}'", name));
    }
    return level;
}

void print_report(std::ostream& out, const models::EvaluationReport& report) {
    for (const auto& [key, value] : report) out << key << ": " << round_trip(value) << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time series processing: resampling, aggregation, models and plots", "chronoseries"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");
    app.set_version_flag("--version", "chronoseries 1.0.0");

    Context context(in, out);
    std::function<void()> action;

    InputOptions info_in;
    auto* info = app.add_subcommand("info", "Print a one-line summary of a series");
    add_input(info, info_in);
    info->callback([&] {
        action = [&] { context.out() << context.load(info_in).summary() << '\n'; };
    });

    InputOptions resample_in;
    OutputOptions resample_out;
    std::string resample_unit, resample_interpolation = "linear";
    auto* resample_cmd = app.add_subcommand("resample", "Resample a point series to a fixed physical unit");
    add_input(resample_cmd, resample_in);
    add_output(resample_cmd, resample_out);
    resample_cmd->add_option("--unit", resample_unit, "Target unit, e.g. 10m or 1h")->required();
    resample_cmd->add_option("--interpolation", resample_interpolation, "linear or nearest");
    resample_cmd->callback([&] {
        action = [&] {
            const auto series = context.load(resample_in);
            context.write_series(resample_out, resample(series, TimeUnit::parse(resample_unit), parse_interpolation(resample_interpolation)));
        };
    });

    InputOptions aggregate_in;
    OutputOptions aggregate_out;
    std::string aggregate_unit, aggregate_ops = "avg", aggregate_interpolation = "linear";
    auto* aggregate_cmd = app.add_subcommand("aggregate", "Aggregate a point series into slots");
    add_input(aggregate_cmd, aggregate_in);
    add_output(aggregate_cmd, aggregate_out);
    aggregate_cmd->add_option("--unit", aggregate_unit, "Slot unit, e.g. 1h, 1D, 1W, 1M")->required();
    aggregate_cmd->add_option("--ops", aggregate_ops, "Comma-separated operations: avg, min, max, sum");
    aggregate_cmd->add_option("--interpolation", aggregate_interpolation, "linear or nearest");
    aggregate_cmd->callback([&] {
        action = [&] {
            const auto series = context.load(aggregate_in);
            std::vector<AggregateOp> operations;
            for (const auto& op : split(aggregate_ops, ',')) operations.push_back(parse_aggregate_op(op));
            context.write_series(aggregate_out, aggregate(series, TimeUnit::parse(aggregate_unit), operations,
                                                          parse_interpolation(aggregate_interpolation)));
        };
    });

    InputOptions ops_in;
    OutputOptions ops_out;
    std::vector<std::string> ops_apply, ops_merge;
    bool ops_stats = false;
    auto* ops_cmd = app.add_subcommand("ops", "Apply operations in order, merge series or print statistics");
    add_input(ops_cmd, ops_in);
    add_output(ops_cmd, ops_out);
    ops_cmd->add_option("--apply", ops_apply, "normalize, diff, csum, derivative, integral, mavg:N, offset:X, rescale:X, filter:a+b");
    ops_cmd->add_option("--merge", ops_merge, "Merge these series (same grid, disjoint labels) before applying");
    ops_cmd->add_flag("--stats", ops_stats, "Print min, max, avg and sum per label instead of writing a series");
    ops_cmd->callback([&] {
        action = [&] {
            auto series = context.load(ops_in);
            if (!ops_merge.empty()) {
                std::vector<TimeSeries> all{series};
                for (const auto& path : ops_merge) {
                    InputOptions other = ops_in;
                    other.path = path;
                    other.labels.clear();
                    all.push_back(context.load(other));
                }
                series = ops::merge(all);
            }
            for (const auto& spec : ops_apply) series = apply_operation(series, spec);
            if (ops_stats) {
                const std::pair<const char*, ops::LabelValues> stats[] = {
                    {"min", ops::min(series)}, {"max", ops::max(series)}, {"avg", ops::avg(series)}, {"sum", ops::sum(series)}};
                std::string text;
                for (const auto& [name, values] : stats) {
                    for (const auto& [label, value] : values) text += fmt::format("{}_{}: {}\n", label, name, round_trip(value));
                }
                context.write(ops_out, text);
            } else {
                context.write_series(ops_out, series);
            }
        };
    });

    InputOptions forecast_in;
    OutputOptions forecast_out;
    ModelOptions forecast_model;
    std::size_t forecast_steps = 1;
    std::vector<std::string> forecast_evaluate;
    std::size_t forecast_rounds = 0;
    auto* forecast_cmd = app.add_subcommand("forecast", "Fit (or load) a forecaster and append predicted elements");
    add_input(forecast_cmd, forecast_in);
    add_output(forecast_cmd, forecast_out);
    add_model(forecast_cmd, forecast_model);
    forecast_cmd->add_option("--steps", forecast_steps, "Number of elements to forecast");
    forecast_cmd->add_option("--evaluate", forecast_evaluate, "Print these metrics (RMSE, MAE, MAPE) instead of forecasting")->delimiter(',');
    forecast_cmd->add_option("--cross-validate", forecast_rounds, "Print cross-validation results over this many folds");
    forecast_cmd->callback([&] {
        action = [&] {
            const auto series = context.load(forecast_in);
            std::vector<models::Metric> metrics;
            for (const auto& m : forecast_evaluate) metrics.push_back(models::parse_metric(m));
            if (metrics.empty()) metrics = {models::Metric::RMSE, models::Metric::MAE};
            if (forecast_rounds > 0) {
                const std::size_t p = periodicity(forecast_model, series);
                const auto window = forecast_model.window;
                std::ostringstream text;
                print_report(text, models::cross_validate(
                                       [&] { return std::make_unique<models::PeriodicAverageForecaster>(p, window); }, series,
                                       forecast_rounds, metrics));
                context.write(forecast_out, text.str());
                return;
            }
            std::unique_ptr<models::Forecaster> model;
            if (!forecast_model.model_file.empty()) {
                model = load_model<models::Forecaster>(forecast_model.model_file);
            } else {
                model = std::make_unique<models::PeriodicAverageForecaster>(periodicity(forecast_model, series), forecast_model.window);
                model->fit(series);
            }
            if (!forecast_model.fit_save.empty()) model->save(forecast_model.fit_save);
            if (!forecast_evaluate.empty()) {
                std::ostringstream text;
                print_report(text, model->evaluate(series, metrics));
                context.write(forecast_out, text.str());
                return;
            }
            context.write_series(forecast_out, model->apply(series, forecast_steps));
        };
    });

    InputOptions reconstruct_in;
    OutputOptions reconstruct_out;
    ModelOptions reconstruct_model;
    auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Fill fully-lost gaps with a reconstruction model");
    add_input(reconstruct_cmd, reconstruct_in);
    add_output(reconstruct_cmd, reconstruct_out);
    add_model(reconstruct_cmd, reconstruct_model);
    reconstruct_cmd->callback([&] {
        action = [&] {
            const auto series = context.load(reconstruct_in);
            std::unique_ptr<models::Reconstructor> model;
            if (!reconstruct_model.model_file.empty()) {
                model = load_model<models::Reconstructor>(reconstruct_model.model_file);
            } else {
                model = std::make_unique<models::PeriodicAverageReconstructor>(periodicity(reconstruct_model, series), reconstruct_model.window);
                model->fit(series);
            }
            if (!reconstruct_model.fit_save.empty()) model->save(reconstruct_model.fit_save);
            context.write_series(reconstruct_out, model->apply(series));
        };
    });

    InputOptions anomaly_in;
    OutputOptions anomaly_out;
    ModelOptions anomaly_model;
    auto* anomaly_cmd = app.add_subcommand("detect-anomalies", "Score elements with a model-based anomaly index");
    add_input(anomaly_cmd, anomaly_in);
    add_output(anomaly_cmd, anomaly_out);
    add_model(anomaly_cmd, anomaly_model);
    anomaly_cmd->callback([&] {
        action = [&] {
            const auto series = context.load(anomaly_in);
            std::unique_ptr<models::ModelBasedAnomalyDetector> model;
            if (!anomaly_model.model_file.empty()) {
                model = load_model<models::ModelBasedAnomalyDetector>(anomaly_model.model_file);
            } else {
                model = std::make_unique<models::PeriodicAverageAnomalyDetector>(periodicity(anomaly_model, series), anomaly_model.window);
                model->fit(series);
            }
            if (!anomaly_model.fit_save.empty()) model->save(anomaly_model.fit_save);
            context.write_series(anomaly_out, model->apply(series));
        };
    });

    InputOptions plot_in;
    std::string plot_html, plot_image;
    std::size_t plot_max_points = plot::default_max_points;
    std::vector<std::string> plot_labels;
    int plot_width = 1200, plot_height = 500;
    auto* plot_cmd = app.add_subcommand("plot", "Write a self-contained HTML chart or a PNG/SVG image");
    add_input(plot_cmd, plot_in);
    auto* html_option = plot_cmd->add_option("--html", plot_html, "HTML output file");
    auto* image_option = plot_cmd->add_option("--image", plot_image, "Image output file (.png or .svg)");
    html_option->excludes(image_option);
    plot_cmd->add_option("--max-points", plot_max_points, "Aggregate above this many elements");
    plot_cmd->add_option("--plot-labels", plot_labels, "Only plot these labels")->delimiter(',');
    plot_cmd->add_option("--width", plot_width, "Image width in pixels");
    plot_cmd->add_option("--height", plot_height, "Image height in pixels");
    plot_cmd->callback([&] {
        action = [&] {
            if (plot_html.empty() && plot_image.empty()) throw Error(ErrorCode::invalid_argument, "plot needs --html or --image");
            const auto series = context.load(plot_in);
            const auto spec = plot::prepare(series, plot_max_points,
                                            plot_labels.empty() ? std::nullopt : std::optional<std::vector<std::string>>(plot_labels));
            if (!plot_html.empty()) {
                context.write(OutputOptions{plot_html, ""}, plot::html(spec, fs::path(plot_in.path).filename().string()));
            } else {
                const plot::ImageOptions options{plot_width, plot_height};
                const std::string extension = fs::path(plot_image).extension().string();
                if (extension == ".svg") {
                    context.write(OutputOptions{plot_image, ""}, plot::svg(spec, options));
                } else if (extension == ".png") {
                    const auto bytes = plot::png(spec, options);
                    context.write(OutputOptions{plot_image, ""}, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
                } else {
                    throw Error(ErrorCode::invalid_argument, fmt::format("unsupported image format '{}' (use .png or .svg)", extension));
                }
            }
        };
    });

    InputOptions convert_in;
    OutputOptions convert_out;
    auto* convert_cmd = app.add_subcommand("convert", "Convert between CSV and the native format");
    add_input(convert_cmd, convert_in);
    add_output(convert_cmd, convert_out, "");
    convert_cmd->callback([&] {
        action = [&] {
            std::string bytes;
            const auto series = context.load(convert_in);
            OutputOptions target = convert_out;
            if (target.format.empty()) {
                // Default to the other format than the input's.
                const bool native_input = convert_in.path != "-" && io::is_native(io::read_file(convert_in.path));
                target.format = native_input ? "csv" : "native";
            }
            context.write_series(target, series);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << '\n';
        return 2;
    }

    try {
        set_log_level(parse_level(log_level));
        if (action) action();
        return 0;
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
    }
    return 1;
}

}  // namespace chronoseries::cli
