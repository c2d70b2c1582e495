#include "chronoseries/plot.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "build_config.hpp"
#include "chronoseries/error.hpp"
#include "chronoseries/io.hpp"
#include "chronoseries/log.hpp"

namespace chronoseries::plot {

std::size_t aggregation_factor(std::size_t size, std::size_t max_points) {
    if (max_points == 0) throw Error(ErrorCode::invalid_argument, "max_points must be positive");
    std::size_t factor = 1;
    while ((size + factor - 1) / factor > max_points) factor *= 10;
    return factor;
}

PlotSpec prepare(const TimeSeries& series, std::size_t max_points, const std::optional<std::vector<std::string>>& labels) {
    if (series.empty()) throw Error(ErrorCode::invalid_argument, "cannot plot an empty series");
    std::vector<std::size_t> columns;
    if (labels) {
        if (labels->empty()) throw Error(ErrorCode::invalid_argument, "no labels selected for plotting");
        for (const auto& label : *labels) columns.push_back(series.label_position(label));
    } else {
        columns.resize(series.labels().size());
        for (std::size_t k = 0; k < columns.size(); ++k) columns[k] = k;
    }

    PlotSpec spec;
    spec.tz = series.tz();
    spec.kind = series.kind();
    spec.factor = aggregation_factor(series.size(), max_points);
    if (spec.factor > 1) logger()->info("Aggregating by \"{}\" for improved plotting", spec.factor);

    const auto& elements = series.elements();
    const std::size_t n = elements.size();
    const std::size_t buckets = (n + spec.factor - 1) / spec.factor;
    const bool banded = spec.factor > 1;
    for (std::size_t column : columns) {
        LabelTrace trace;
        trace.label = series.labels()[column];
        trace.values.reserve(buckets);
        if (banded) {
            trace.band_min.reserve(buckets);
            trace.band_max.reserve(buckets);
        }
        spec.labels.push_back(std::move(trace));
    }
    for (const auto& name : series.index_names()) spec.indexes.push_back(IndexTrace{name, {}});

    for (std::size_t b = 0; b < buckets; ++b) {
        const std::size_t from = b * spec.factor;
        const std::size_t to = std::min(n, from + spec.factor);
        spec.starts.push_back(elements[from].start);
        spec.ends.push_back(elements[to - 1].end);
        for (std::size_t k = 0; k < columns.size(); ++k) {
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t i = from; i < to; ++i) {
                const double v = elements[i].data[columns[k]];
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            // The mean of finite values lies within [lo, hi] up to rounding; clamp
            // so the band always contains the line.
            const double mean = std::clamp(sum / static_cast<double>(to - from), lo, hi);
            spec.labels[k].values.push_back(mean);
            if (banded) {
                spec.labels[k].band_min.push_back(lo);
                spec.labels[k].band_max.push_back(hi);
            }
        }
        for (auto& index : spec.indexes) {
            const bool use_max = index.name == index_names::anomaly;
            double acc = 0.0;
            std::size_t count = 0;
            for (std::size_t i = from; i < to; ++i) {
                if (auto v = elements[i].indexes.get(index.name)) {
                    acc = use_max ? (count == 0 ? *v : std::max(acc, *v)) : acc + *v;
                    ++count;
                }
            }
            if (count == 0) {
                index.values.push_back(std::nullopt);
            } else {
                index.values.push_back(use_max ? acc : std::clamp(acc / static_cast<double>(count), 0.0, 1.0));
            }
        }
    }
    return spec;
}

nlohmann::ordered_json island(const PlotSpec& spec) {
    nlohmann::ordered_json doc;
    doc["version"] = island_version;
    doc["tz"] = spec.tz;
    doc["kind"] = spec.kind == ElementKind::slots ? "slots" : "points";
    doc["factor"] = spec.factor;
    // Built locally and moved in: ordered_json stores members in a vector, so
    // references into `doc` do not survive later insertions.
    nlohmann::ordered_json timestamps = nlohmann::ordered_json::array();
    nlohmann::ordered_json ends = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < spec.size(); ++i) {
        timestamps.push_back(spec.starts[i].epoch * 1000.0);
        ends.push_back(spec.ends[i].epoch * 1000.0);
    }
    doc["timestamps"] = std::move(timestamps);
    doc["ends"] = std::move(ends);
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    nlohmann::ordered_json bands = nlohmann::ordered_json::object();
    for (const auto& trace : spec.labels) {
        labels.push_back(trace.label);
        values[trace.label] = trace.values;
        if (!trace.band_min.empty()) bands[trace.label] = {{"min", trace.band_min}, {"max", trace.band_max}};
    }
    doc["labels"] = std::move(labels);
    doc["values"] = std::move(values);
    doc["bands"] = std::move(bands);
    nlohmann::ordered_json indexes = nlohmann::ordered_json::object();
    for (const auto& trace : spec.indexes) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& v : trace.values) out.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
        indexes[trace.name] = std::move(out);
    }
    doc["indexes"] = std::move(indexes);
    return doc;
}

namespace {

// Keeps "</script>" and friends from terminating the element early.
std::string escape_closing_tags(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '<' && i + 1 < text.size() && text[i + 1] == '/') {
            out += "<\\/";
            ++i;
        } else {
            out += text[i];
        }
    }
    return out;
}

// In dumped JSON '<' only occurs inside strings, where \u003c is equivalent;
// this keeps "</script>", "<!--" and "<script" sequences out of the island.
std::string escape_json_for_html(std::string_view json) {
    std::string out;
    out.reserve(json.size());
    for (char c : json) {
        if (c == '<') {
            out += "\\u003c";
        } else {
            out += c;
        }
    }
    return out;
}

std::string escape_html(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string html(const PlotSpec& spec, std::string_view title) {
    const std::string data = escape_json_for_html(island(spec).dump());
    const std::string script = escape_closing_tags(build::renderer_script);
    return fmt::format(
        "<!DOCTYPE html>\n"
        "<html lang=\"en\">\n"
        "<head>\n"
        "<meta charset=\"utf-8\">\n"
        "<title>{0}</title>\n"
        "<style>body{{margin:0;font-family:sans-serif;background:#fff}}"
        "#chronoseries-chart{{position:relative;width:100%;height:480px}}</style>\n"
        "</head>\n"
        "<body>\n"
        "<div id=\"chronoseries-chart\"></div>\n"
        "<script type=\"application/json\" id=\"chronoseries-data\">{1}</script>\n"
        "<script>\n{2}\n</script>\n"
        "</body>\n"
        "</html>\n",
        escape_html(title), data, script);
}

void render_html(const PlotSpec& spec, const std::filesystem::path& path, std::string_view title) {
    io::write_file(path, html(spec, title));
}

}  // namespace chronoseries::plot
