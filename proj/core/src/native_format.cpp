#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/format.hpp"
#include "chronoseries/io.hpp"

namespace chronoseries::io {

namespace {

constexpr std::string_view native_prefix = "# chronoseries ";

std::string quoted_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ',';
        const std::string& item = items[i];
        if (item.find_first_of(",\"\n\r") == std::string::npos && item == trim(item)) {
            out += item;
        } else {
            out += '"';
            for (char c : item) {
                if (c == '"') out += '"';
                out += c;
            }
            out += '"';
        }
    }
    return out;
}

class NativeReader {
public:
    explicit NativeReader(std::string_view text) : text_(text) {}

    // Next line without its terminator; nullopt at the end of input.
    std::optional<std::string_view> next() {
        if (pos_ >= text_.size()) return std::nullopt;
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        std::string_view line = text_.substr(pos_, end - pos_);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos_ = end + 1;
        ++number_;
        return line;
    }

    std::string_view header(std::string_view key) {
        auto value = optional_header(key);
        if (!value) throw Error(ErrorCode::parse_error, fmt::format("line {}: expected '# {}: ...'", number_ + 1, key));
        return *value;
    }

    // Consumes the next line only when it is the `key` header.
    std::optional<std::string_view> optional_header(std::string_view key) {
        const std::size_t pos = pos_;
        const std::size_t number = number_;
        auto line = next();
        const std::string prefix = fmt::format("# {}:", key);
        if (!line || !line->starts_with(prefix)) {
            pos_ = pos;
            number_ = number;
            return std::nullopt;
        }
        return trim(line->substr(prefix.size()));
    }

    std::size_t number() const noexcept { return number_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t number_ = 0;
};

std::vector<std::string> parse_list(std::string_view text) {
    if (trim(text).empty()) return {};
    auto items = split_csv_line(text, ',');
    for (auto& item : items) item = std::string(trim(item));
    return items;
}

}  // namespace

bool is_native(std::string_view bytes) {
    if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
    return bytes.starts_with(native_prefix);
}

std::string write_native(const TimeSeries& series) {
    if (series.empty()) throw Error(ErrorCode::invalid_argument, "cannot save an empty series");
    const auto indexes = series.index_names();
    const auto& unit = series.resolution().unit;
    std::string out;
    out += native_format_version;
    out += '\n';
    out += fmt::format("# kind: {}\n", series.is_slots() ? "slots" : "points");
    out += fmt::format("# tz: {}\n", series.tz());
    out += fmt::format("# resolution: {}\n", unit ? unit->str() : "variable");
    // Positional series have no labels to store, only their arity.
    if (series.labeled()) {
        out += fmt::format("# labels: {}\n", quoted_list(series.labels()));
    } else {
        out += fmt::format("# positional: {}\n", series.labels().size());
    }
    out += fmt::format("# indexes: {}\n", quoted_list(indexes));
    for (const auto& e : series) {
        out += round_trip(e.start.epoch);
        if (series.is_slots()) {
            out += ',';
            out += round_trip(e.end.epoch);
        }
        for (double v : e.data) {
            out += ',';
            out += round_trip(v);
        }
        for (const auto& name : indexes) {
            out += ',';
            if (auto value = e.indexes.get(name)) out += round_trip(*value);
        }
        out += '\n';
    }
    return out;
}

TimeSeries read_native(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    NativeReader reader(text);
    const auto first = reader.next();
    if (!first || !first->starts_with(native_prefix)) {
        throw Error(ErrorCode::parse_error, "not a chronoseries file (missing '# chronoseries' header)");
    }
    if (*first != native_format_version) {
        throw Error(ErrorCode::version_mismatch,
                    fmt::format("unsupported file version '{}' (this build reads '{}')", trim(first->substr(2)),
                                trim(native_format_version.substr(2))));
    }
    const std::string_view kind = reader.header("kind");
    if (kind != "points" && kind != "slots") {
        throw Error(ErrorCode::parse_error, fmt::format("line {}: unknown kind '{}'", reader.number(), kind));
    }
    const bool slots = kind == "slots";
    const std::string tz(reader.header("tz"));
    const std::string_view resolution_text = reader.header("resolution");
    std::optional<TimeUnit> unit;
    if (resolution_text != "variable") unit = TimeUnit::parse(resolution_text);
    if (slots && !unit) throw Error(ErrorCode::parse_error, "slot series need a unit resolution");
    std::vector<std::string> labels;
    bool positional = false;
    if (auto arity = reader.optional_header("positional")) {
        const auto count = parse_double(*arity);
        if (slots || !count || *count < 1 || *count != std::floor(*count) || *count > 1e6) {
            throw Error(ErrorCode::parse_error, fmt::format("line {}: invalid positional arity '{}'", reader.number(), *arity));
        }
        positional = true;
        labels.resize(static_cast<std::size_t>(*count));
    } else {
        labels = parse_list(reader.header("labels"));
        if (labels.empty()) throw Error(ErrorCode::parse_error, "no labels declared");
    }
    const auto indexes = parse_list(reader.header("indexes"));

    std::optional<TimeSeries::Builder> builder;
    if (slots) {
        builder.emplace(TimeSeries::Builder::slots(labels, *unit, tz));
    } else if (positional) {
        builder.emplace(TimeSeries::Builder::positional_points(labels.size(), tz));
    } else {
        builder.emplace(TimeSeries::Builder::points(labels, tz));
    }

    const std::size_t time_fields = slots ? 2 : 1;
    const std::size_t arity = time_fields + labels.size() + indexes.size();
    std::vector<Timestamp> times;
    while (auto line = reader.next()) {
        if (trim(*line).empty()) continue;
        const auto fields = split_csv_line(*line, ',');
        if (fields.size() != arity) {
            throw Error(ErrorCode::parse_error, fmt::format("line {}: {} fields, but the header declares {} ({} labels, {} indexes)",
                                                            reader.number(), fields.size(), arity, labels.size(), indexes.size()));
        }
        auto number = [&](std::size_t i) {
            auto value = parse_double(fields[i]);
            if (!value) throw Error(ErrorCode::parse_error, fmt::format("line {}: '{}' is not a number", reader.number(), fields[i]));
            return *value;
        };
        Element e;
        e.start = Timestamp{number(0)};
        e.end = slots ? Timestamp{number(1)} : e.start;
        e.data.reserve(labels.size());
        for (std::size_t k = 0; k < labels.size(); ++k) e.data.push_back(number(time_fields + k));
        for (std::size_t k = 0; k < indexes.size(); ++k) {
            const std::size_t i = time_fields + labels.size() + k;
            if (!trim(fields[i]).empty()) e.indexes.set(indexes[k], number(i));
        }
        try {
            builder->append(std::move(e));
        } catch (const Error& error) {
            throw Error(error.code(), fmt::format("line {}: {}", reader.number(), error.what()));
        }
        times.push_back(builder->peek().elements().back().start);
    }
    if (builder->size() == 0) throw Error(ErrorCode::parse_error, "file declares a series but has no rows");
    if (!slots) {
        if (unit) {
            builder->resolution(Resolution{unit, unit->is_physical() ? unit->seconds() : 0.0});
        } else {
            builder->resolution(Resolution{std::nullopt, times.size() >= 2 ? detect_resolution(times).auto_interval : 0.0});
        }
    }
    return std::move(*builder).build();
}

void save(const TimeSeries& series, const std::filesystem::path& path) { write_file(path, write_native(series)); }

TimeSeries load(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return read_native(text);
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

TimeSeries read_any(std::string_view bytes, const CsvOptions& options) {
    if (is_native(bytes)) return read_native(bytes);
    return read_csv(bytes, options);
}

TimeSeries load_any(const std::filesystem::path& path, const CsvOptions& options) {
    const std::string bytes = read_file(path);
    try {
        return read_any(bytes, options);
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace chronoseries::io
