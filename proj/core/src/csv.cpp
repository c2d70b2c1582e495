#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "chronoseries/error.hpp"
#include "chronoseries/format.hpp"
#include "chronoseries/io.hpp"
#include "chronoseries/log.hpp"
#include "civil.hpp"

namespace chronoseries::io {

namespace {

constexpr std::string_view epoch_format = "epoch";
constexpr std::string_view iso_format = "iso8601";
constexpr std::string_view plain_format = "%Y-%m-%d %H:%M:%S";
constexpr std::size_t sample_lines = 64;

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// ------------------------------------------------------------------ encoding

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && (cp < 0x10000 || cp > 0x10FFFF)) ||
            (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += extra + 1;
    }
    return true;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::string from_latin1(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) append_utf8(out, static_cast<unsigned char>(c));
    return out;
}

std::string from_utf16(std::string_view s, bool little_endian) {
    if (s.size() % 2 != 0) throw Error(ErrorCode::encoding, "UTF-16 input has an odd number of bytes");
    std::string out;
    out.reserve(s.size() / 2);
    auto unit = [&](std::size_t i) -> std::uint32_t {
        const auto a = static_cast<unsigned char>(s[i]);
        const auto b = static_cast<unsigned char>(s[i + 1]);
        return little_endian ? (a | (b << 8)) : ((a << 8) | b);
    };
    for (std::size_t i = 0; i < s.size(); i += 2) {
        std::uint32_t cp = unit(i);
        if (cp >= 0xD800 && cp <= 0xDBFF) {
            if (i + 3 >= s.size()) throw Error(ErrorCode::encoding, "truncated UTF-16 surrogate pair");
            const std::uint32_t low = unit(i + 2);
            if (low < 0xDC00 || low > 0xDFFF) throw Error(ErrorCode::encoding, "invalid UTF-16 surrogate pair");
            cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
            i += 2;
        } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
            throw Error(ErrorCode::encoding, "unpaired UTF-16 surrogate");
        }
        append_utf8(out, cp);
    }
    return out;
}

// Returns the text as UTF-8 and the name of the encoding it was read with.
std::pair<std::string, std::string> decode(std::string_view bytes, const std::optional<std::string>& forced) {
    const bool utf8_bom = bytes.starts_with("\xEF\xBB\xBF");
    const bool utf16le_bom = bytes.starts_with("\xFF\xFE");
    const bool utf16be_bom = bytes.starts_with("\xFE\xFF");
    if (forced) {
        const std::string name = lower(*forced);
        if (name == "utf-8" || name == "utf8") {
            std::string_view body = utf8_bom ? bytes.substr(3) : bytes;
            if (!valid_utf8(body)) throw Error(ErrorCode::encoding, "input is not valid UTF-8");
            return {std::string(body), "utf-8"};
        }
        if (name == "utf-16" || name == "utf16") {
            if (utf16le_bom || utf16be_bom) return {from_utf16(bytes.substr(2), utf16le_bom), "utf-16"};
            return {from_utf16(bytes, true), "utf-16"};
        }
        if (name == "latin-1" || name == "latin1" || name == "iso-8859-1") return {from_latin1(bytes), "latin-1"};
        throw Error(ErrorCode::invalid_argument, fmt::format("unsupported encoding '{}' (utf-8, utf-16 or latin-1)", *forced));
    }
    if (utf8_bom) {
        std::string_view body = bytes.substr(3);
        if (!valid_utf8(body)) throw Error(ErrorCode::encoding, "input has a UTF-8 byte order mark but is not valid UTF-8");
        return {std::string(body), "utf-8"};
    }
    if (utf16le_bom || utf16be_bom) return {from_utf16(bytes.substr(2), utf16le_bom), "utf-16"};
    if (bytes.find('\0') != std::string_view::npos) {
        throw Error(ErrorCode::encoding, "input contains NUL bytes and no byte order mark; not a text file");
    }
    if (valid_utf8(bytes)) return {std::string(bytes), "utf-8"};
    return {from_latin1(bytes), "latin-1"};
}

// --------------------------------------------------------------- line split

struct Line {
    std::size_t number;
    std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++number;
        if (!trim(line).empty()) lines.push_back(Line{number, line});
        if (end == text.size()) break;
        pos = end + 1;
    }
    return lines;
}

char detect_separator(const std::vector<Line>& lines) {
    constexpr char candidates[] = {',', ';', '\t'};
    char best = 0;
    double best_score = -1.0;
    std::size_t best_columns = 0;
    const std::size_t n = std::min(lines.size(), sample_lines);
    for (char c : candidates) {
        std::map<std::size_t, std::size_t> counts;
        for (std::size_t i = 0; i < n; ++i) counts[split_csv_line(lines[i].text, c).size()]++;
        const auto mode = std::max_element(counts.begin(), counts.end(),
                                           [](const auto& a, const auto& b) { return a.second < b.second; });
        if (mode->first < 2) continue;
        const double score = static_cast<double>(mode->second) / static_cast<double>(n);
        if (score > best_score || (score == best_score && mode->first > best_columns)) {
            best = c;
            best_score = score;
            best_columns = mode->first;
        }
    }
    if (best == 0) {
        throw Error(ErrorCode::parse_error, "cannot detect the field separator: no candidate (',', ';', tab) gives 2 or more columns");
    }
    return best;
}

// ---------------------------------------------------------------- timestamps

struct Fields {
    std::int64_t year = 0;
    int month = 1, day = 1, hour = 0, minute = 0;
    double second = 0.0;
    std::optional<std::int32_t> offset;
};

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}
    bool done() const { return i_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[i_]; }
    bool eat(char c) {
        if (peek() != c) return false;
        ++i_;
        return true;
    }
    std::optional<int> digits(std::size_t min, std::size_t max) {
        std::size_t k = 0;
        int value = 0;
        while (k < max && !done() && std::isdigit(static_cast<unsigned char>(peek()))) {
            value = value * 10 + (peek() - '0');
            ++i_;
            ++k;
        }
        if (k < min) return std::nullopt;
        return value;
    }
    std::optional<double> seconds() {
        auto whole = digits(2, 2);
        if (!whole) return std::nullopt;
        double value = *whole;
        if (eat('.') || eat(',')) {
            double scale = 0.1;
            std::size_t k = 0;
            while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
                value += (peek() - '0') * scale;
                scale /= 10.0;
                ++i_;
                ++k;
            }
            if (k == 0) return std::nullopt;
        }
        return value;
    }
    std::optional<std::int32_t> offset() {
        if (eat('Z') || eat('z')) return 0;
        const char sign = peek();
        if (sign != '+' && sign != '-') return std::nullopt;
        ++i_;
        auto hours = digits(2, 2);
        if (!hours) return std::nullopt;
        int minutes = 0;
        if (eat(':')) {
            auto m = digits(2, 2);
            if (!m) return std::nullopt;
            minutes = *m;
        } else if (auto m = digits(2, 2)) {
            minutes = *m;
        }
        if (*hours > 23 || minutes > 59) return std::nullopt;
        const std::int32_t total = *hours * 3600 + minutes * 60;
        return sign == '-' ? -total : total;
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;
};

bool valid_fields(const Fields& f) {
    return f.month >= 1 && f.month <= 12 && f.day >= 1 && f.day <= detail::days_in_month(f.year, f.month) && f.hour >= 0 &&
           f.hour <= 23 && f.minute >= 0 && f.minute <= 59 && f.second >= 0.0 && f.second < 60.0;
}

std::optional<Fields> parse_iso(std::string_view text) {
    Cursor c(trim(text));
    Fields f;
    auto year = c.digits(4, 4);
    if (!year || !c.eat('-')) return std::nullopt;
    auto month = c.digits(2, 2);
    if (!month || !c.eat('-')) return std::nullopt;
    auto day = c.digits(2, 2);
    if (!day) return std::nullopt;
    f.year = *year;
    f.month = *month;
    f.day = *day;
    if (!c.done()) {
        if (!c.eat('T') && !c.eat('t')) return std::nullopt;
        auto hour = c.digits(2, 2);
        if (!hour || !c.eat(':')) return std::nullopt;
        auto minute = c.digits(2, 2);
        if (!minute) return std::nullopt;
        f.hour = *hour;
        f.minute = *minute;
        if (c.eat(':')) {
            auto second = c.seconds();
            if (!second) return std::nullopt;
            f.second = *second;
        }
        if (!c.done()) {
            f.offset = c.offset();
            if (!f.offset) return std::nullopt;
        }
    }
    if (!c.done() || !valid_fields(f)) return std::nullopt;
    return f;
}

std::optional<Fields> parse_pattern(std::string_view text, std::string_view pattern) {
    Cursor c(trim(text));
    Fields f;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] != '%') {
            if (!c.eat(pattern[i])) return std::nullopt;
            continue;
        }
        if (++i == pattern.size()) return std::nullopt;
        std::optional<int> v;
        switch (pattern[i]) {
        case 'Y': v = c.digits(4, 4); if (v) f.year = *v; break;
        case 'm': v = c.digits(1, 2); if (v) f.month = *v; break;
        case 'd': v = c.digits(1, 2); if (v) f.day = *v; break;
        case 'H': v = c.digits(1, 2); if (v) f.hour = *v; break;
        case 'M': v = c.digits(2, 2); if (v) f.minute = *v; break;
        case 'S': {
            auto s = c.seconds();
            if (!s) return std::nullopt;
            f.second = *s;
            v = 0;
            break;
        }
        case 'z': f.offset = c.offset(); if (!f.offset) return std::nullopt; v = 0; break;
        case '%': if (!c.eat('%')) return std::nullopt; v = 0; break;
        default:
            throw Error(ErrorCode::invalid_argument, fmt::format("unsupported directive '%{}' in timestamp format '{}'", pattern[i], pattern));
        }
        if (!v) return std::nullopt;
    }
    if (!c.done() || !valid_fields(f)) return std::nullopt;
    return f;
}

Timestamp resolve(const Fields& f, std::string_view tz) {
    if (f.offset) {
        const double days = static_cast<double>(detail::days_from_civil(f.year, f.month, f.day));
        return Timestamp{days * 86400.0 + f.hour * 3600.0 + f.minute * 60.0 + f.second - *f.offset};
    }
    CivilTime civil;
    civil.year = f.year;
    civil.month = f.month;
    civil.day = f.day;
    civil.hour = f.hour;
    civil.minute = f.minute;
    civil.second = f.second;
    return from_civil(civil, tz);
}

// ------------------------------------------------------------------- schema

bool numeric(std::string_view field) { return parse_double(field).has_value(); }

bool time_of_day(std::string_view field) {
    Cursor c(trim(field));
    auto h = c.digits(1, 2);
    if (!h || !c.eat(':') || !c.digits(2, 2)) return false;
    if (c.eat(':') && !c.seconds()) return false;
    return c.done();
}

bool looks_like_data(std::string_view field) {
    field = trim(field);
    if (field.empty() || numeric(field) || time_of_day(field)) return true;
    return parse_iso(field) || parse_pattern(field, plain_format);
}

std::size_t resolve_column(std::string_view name, const std::vector<std::string>& header, std::size_t columns) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (lower(header[i]) == lower(name)) return i;
    }
    if (auto position = parse_double(name); position && *position >= 0 && std::floor(*position) == *position) {
        const auto index = static_cast<std::size_t>(*position);
        if (index < columns) return index;
    }
    throw Error(ErrorCode::not_found, fmt::format("no column '{}' (columns: {})", name,
                                                  header.empty() ? fmt::format("{} unnamed", columns) : fmt::format("{}", fmt::join(header, ", "))));
}

std::optional<std::size_t> find_named(const std::vector<std::string>& header, std::initializer_list<std::string_view> names) {
    for (std::string_view name : names) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(trim(header[i])) == name) return i;
        }
    }
    return std::nullopt;
}

std::string timestamp_text(const std::vector<std::string>& fields, const std::vector<std::size_t>& columns) {
    if (columns.size() == 1) return std::string(trim(fields[columns[0]]));
    return fmt::format("{} {}", trim(fields[columns[0]]), trim(fields[columns[1]]));
}

struct Row {
    std::size_t line;
    Timestamp start;
    Timestamp end;
    std::vector<double> values;
};

std::optional<TimeUnit> slot_unit(const std::vector<Row>& rows, std::string_view tz) {
    const double duration = rows.front().end - rows.front().start;
    if (!(duration > 0.0)) return std::nullopt;
    auto fits = [&](const TimeUnit& unit) {
        return std::all_of(rows.begin(), rows.end(), [&](const Row& r) { return shift(r.start, unit, 1, tz) == r.end; });
    };
    std::vector<TimeUnit> candidates;
    const auto days = std::llround(duration / 86400.0);
    if (days >= 1) {
        candidates.emplace_back(days, UnitKind::days);
        if (days % 7 == 0) candidates.emplace_back(days / 7, UnitKind::weeks);
    }
    for (std::int64_t m = 1; m <= 12; ++m) candidates.emplace_back(m, UnitKind::months);
    candidates.emplace_back(1, UnitKind::years);
    const bool physical_first = std::fmod(duration, 86400.0) != 0.0;
    if (std::floor(duration) == duration) {
        const auto seconds = static_cast<std::int64_t>(duration);
        TimeUnit physical = seconds % 3600 == 0 ? TimeUnit(seconds / 3600, UnitKind::hours)
                            : seconds % 60 == 0 ? TimeUnit(seconds / 60, UnitKind::minutes)
                                                : TimeUnit(seconds, UnitKind::seconds);
        if (physical_first) {
            candidates.insert(candidates.begin(), physical);
        } else {
            candidates.push_back(physical);
        }
    }
    for (const auto& unit : candidates) {
        if (fits(unit)) return unit;
    }
    return std::nullopt;
}

}  // namespace

// ------------------------------------------------------------------- public

std::vector<std::string> split_csv_line(std::string_view line, char separator) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty()) {
            field.clear();
            quoted = true;
        } else if (c == separator) {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::optional<Timestamp> parse_timestamp(std::string_view text, std::string_view format, std::string_view tz) {
    if (format == epoch_format) {
        auto value = parse_double(text);
        if (!value || !std::isfinite(*value)) return std::nullopt;
        return Timestamp{*value};
    }
    std::optional<Fields> fields = format == iso_format ? parse_iso(text) : parse_pattern(text, format);
    if (!fields) return std::nullopt;
    return resolve(*fields, tz);
}

CsvOptions CsvSchema::as_options() const {
    CsvOptions options;
    options.encoding = encoding;
    options.separator = separator;
    options.header = header;
    for (auto c : timestamp_columns) options.timestamp_columns.push_back(std::to_string(c));
    options.timestamp_format = timestamp_format;
    for (auto c : value_columns) options.value_columns.push_back(std::to_string(c));
    options.labels = labels;
    options.tz = tz;
    return options;
}

TimeSeries read_csv(std::string_view bytes, const CsvOptions& options, CsvSchema* schema_out) {
    CsvSchema schema;
    auto [text, encoding] = decode(bytes, options.encoding);
    schema.encoding = encoding;
    const auto lines = split_lines(text);
    if (lines.empty()) throw Error(ErrorCode::parse_error, "CSV input is empty");

    schema.separator = options.separator ? *options.separator : detect_separator(lines);
    const auto first = split_csv_line(lines.front().text, schema.separator);
    const std::size_t columns = first.size();
    if (columns < 2) {
        throw Error(ErrorCode::parse_error, fmt::format("line {}: expected a timestamp and at least one value column", lines.front().number));
    }
    schema.header = options.header.value_or(!std::all_of(first.begin(), first.end(), looks_like_data));
    std::vector<std::string> header;
    if (schema.header) {
        for (const auto& f : first) header.emplace_back(trim(f));
    }
    const std::size_t data_begin = schema.header ? 1 : 0;
    if (data_begin >= lines.size()) throw Error(ErrorCode::parse_error, "CSV input has a header but no data rows");
    schema.tz = options.tz.value_or("UTC");

    // Timestamp columns.
    if (!options.timestamp_columns.empty()) {
        if (options.timestamp_columns.size() > 2) throw Error(ErrorCode::invalid_argument, "at most two timestamp columns (date, time)");
        for (const auto& c : options.timestamp_columns) schema.timestamp_columns.push_back(resolve_column(c, header, columns));
    } else if (auto start = find_named(header, {"start_epoch"}), end = find_named(header, {"end_epoch"}); start && end) {
        schema.timestamp_columns = {*start, *end};
        schema.slots = true;
    } else if (auto ts = find_named(header, {"epoch", "timestamp", "datetime", "date_time", "time_stamp", "t"})) {
        schema.timestamp_columns = {*ts};
    } else if (auto date = find_named(header, {"date"}), time = find_named(header, {"time"}); date && time) {
        schema.timestamp_columns = {*date, *time};
    } else if (auto only = find_named(header, {"date", "time"})) {
        schema.timestamp_columns = {*only};
    } else {
        schema.timestamp_columns = {0};
    }
    if (!options.timestamp_columns.empty() && header.size() > 0) {
        schema.slots = schema.timestamp_columns.size() == 2 && lower(header[schema.timestamp_columns[0]]) == "start_epoch" &&
                       lower(header[schema.timestamp_columns[1]]) == "end_epoch";
    }

    // Value columns and labels.
    if (!options.value_columns.empty()) {
        for (const auto& c : options.value_columns) schema.value_columns.push_back(resolve_column(c, header, columns));
    } else {
        for (std::size_t i = 0; i < columns; ++i) {
            if (std::find(schema.timestamp_columns.begin(), schema.timestamp_columns.end(), i) == schema.timestamp_columns.end()) {
                schema.value_columns.push_back(i);
            }
        }
    }
    if (schema.value_columns.empty()) throw Error(ErrorCode::parse_error, "CSV input has no value columns");
    if (!options.labels.empty()) {
        if (options.labels.size() != schema.value_columns.size()) {
            throw Error(ErrorCode::label_mismatch,
                        fmt::format("{} labels given for {} value columns", options.labels.size(), schema.value_columns.size()));
        }
        schema.labels = options.labels;
    } else {
        for (std::size_t k = 0; k < schema.value_columns.size(); ++k) {
            schema.labels.push_back(schema.header ? header[schema.value_columns[k]] : fmt::format("value_{}", k + 1));
        }
    }

    // Split every data row once.
    std::vector<std::pair<std::size_t, std::vector<std::string>>> raw;
    raw.reserve(lines.size() - data_begin);
    for (std::size_t i = data_begin; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i].text, schema.separator);
        if (fields.size() != columns) {
            throw Error(ErrorCode::parse_error,
                        fmt::format("line {}: expected {} fields, found {}", lines[i].number, columns, fields.size()));
        }
        raw.emplace_back(lines[i].number, std::move(fields));
    }

    // Timestamp format: first candidate that parses every row.
    auto ts_of = [&](const std::vector<std::string>& fields, std::size_t which) {
        if (schema.slots) return std::string(trim(fields[schema.timestamp_columns[which]]));
        return timestamp_text(fields, schema.timestamp_columns);
    };
    if (options.timestamp_format) {
        schema.timestamp_format = *options.timestamp_format;
    } else {
        const std::string_view candidates[] = {epoch_format, iso_format, plain_format};
        std::optional<std::string_view> chosen;
        std::optional<std::string_view> first_match;
        for (auto format : candidates) {
            bool all = true;
            for (const auto& [line, fields] : raw) {
                if (!parse_timestamp(ts_of(fields, 0), format, schema.tz)) {
                    all = false;
                    break;
                }
            }
            if (all) {
                chosen = format;
                break;
            }
            if (!first_match && parse_timestamp(ts_of(raw.front().second, 0), format, schema.tz)) first_match = format;
        }
        if (!chosen && !first_match) {
            throw Error(ErrorCode::parse_error, fmt::format("line {}: unrecognised timestamp '{}' (tried epoch seconds, ISO 8601, {})",
                                                            raw.front().first, ts_of(raw.front().second, 0), plain_format));
        }
        schema.timestamp_format = std::string(chosen.value_or(*first_match));
    }

    std::vector<Row> rows;
    rows.reserve(raw.size());
    for (const auto& [line, fields] : raw) {
        Row row;
        row.line = line;
        for (std::size_t which = 0; which < (schema.slots ? 2u : 1u); ++which) {
            const std::string ts = ts_of(fields, which);
            auto t = parse_timestamp(ts, schema.timestamp_format, schema.tz);
            if (!t) {
                throw Error(ErrorCode::parse_error,
                            fmt::format("line {}: cannot parse timestamp '{}' as {}", line, ts, schema.timestamp_format));
            }
            (which == 0 ? row.start : row.end) = *t;
        }
        if (!schema.slots) row.end = row.start;
        row.values.reserve(schema.value_columns.size());
        for (std::size_t k = 0; k < schema.value_columns.size(); ++k) {
            const auto& field = fields[schema.value_columns[k]];
            auto value = parse_double(field);
            if (!value || !std::isfinite(*value)) {
                throw Error(ErrorCode::parse_error,
                            fmt::format("line {}: value '{}' for '{}' is not a finite number", line, trim(field), schema.labels[k]));
            }
            row.values.push_back(*value);
        }
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].start == rows[i - 1].start) {
            const auto [a, b] = std::minmax(rows[i - 1].line, rows[i].line);
            throw Error(ErrorCode::parse_error, fmt::format("duplicate timestamp {} on lines {} and {}",
                                                            format_timestamp(rows[i].start, schema.tz), a, b));
        }
    }

    std::optional<TimeSeries::Builder> builder;
    if (schema.slots) {
        auto unit = slot_unit(rows, schema.tz);
        if (!unit) throw Error(ErrorCode::parse_error, "slot rows do not share a single time unit");
        builder.emplace(TimeSeries::Builder::slots(schema.labels, *unit, schema.tz));
    } else {
        builder.emplace(TimeSeries::Builder::points(schema.labels, schema.tz));
    }
    builder->reserve(rows.size());
    for (auto& row : rows) builder->append(Element{row.start, row.end, std::move(row.values), {}});
    if (schema_out != nullptr) *schema_out = schema;
    return std::move(*builder).build();
}

TimeSeries from_csv(const std::filesystem::path& path, const CsvOptions& options, CsvSchema* schema) {
    const std::string bytes = read_file(path);
    try {
        return read_csv(bytes, options, schema);
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

namespace {

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",;\t\"\n\r") == std::string_view::npos && text == trim(text)) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string write_csv(const TimeSeries& series) {
    if (series.empty()) throw Error(ErrorCode::invalid_argument, "cannot write an empty series to CSV");
    std::string out = series.is_slots() ? "start_epoch,end_epoch" : "epoch";
    for (const auto& label : series.labels()) {
        out += ',';
        out += csv_field(label);
    }
    out += '\n';
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
        out += '\n';
    }
    return out;
}

void to_csv(const TimeSeries& series, const std::filesystem::path& path) { write_file(path, write_csv(series)); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, fmt::format("cannot read '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::io, fmt::format("error writing '{}'", path.string()));
}

}  // namespace chronoseries::io
