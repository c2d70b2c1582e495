#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <png.h>

#include "chronoseries/error.hpp"
#include "chronoseries/io.hpp"
#include "chronoseries/plot.hpp"

namespace chronoseries::plot {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr std::array<Rgb, 6> palette{{{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {148, 103, 189}, {140, 86, 75}, {227, 119, 194}}};
constexpr Rgb loss_color{214, 39, 40};
constexpr Rgb anomaly_color{200, 0, 120};
constexpr Rgb other_index_color{127, 127, 127};
constexpr Rgb axis_color{60, 60, 60};
constexpr Rgb grid_color{225, 225, 225};

std::string hex(Rgb c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

// ---------------------------------------------------------------- geometry

struct Layout {
    double left = 70, right = 20, top = 20, bottom = 50;
    double width, height;
    double x0, x1, y0, y1;

    double px(double epoch) const { return left + (epoch - x0) / (x1 - x0) * (width - left - right); }
    double py(double value) const { return top + (y1 - value) / (y1 - y0) * (height - top - bottom); }
    /// Index overlays map [0, 1] to the full plot height.
    double pi(double index) const { return top + (1.0 - index) * (height - top - bottom); }
    double plot_bottom() const { return height - bottom; }
    double plot_right() const { return width - right; }
};

Layout layout(const PlotSpec& spec, const ImageOptions& options) {
    if (spec.labels.empty()) throw Error(ErrorCode::invalid_argument, "no labels to plot");
    if (spec.size() == 0) throw Error(ErrorCode::invalid_argument, "nothing to plot");
    if (options.width < 200 || options.height < 150) throw Error(ErrorCode::invalid_argument, "image must be at least 200x150");
    Layout l;
    l.width = options.width;
    l.height = options.height;
    l.x0 = spec.starts.front().epoch;
    l.x1 = std::max(spec.ends.back().epoch, spec.starts.back().epoch);
    if (!(l.x1 > l.x0)) l.x1 = l.x0 + 1.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& trace : spec.labels) {
        for (double v : trace.values) lo = std::min(lo, v), hi = std::max(hi, v);
        for (double v : trace.band_min) lo = std::min(lo, v);
        for (double v : trace.band_max) hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = (hi - lo) * 0.05;
    l.y0 = lo - pad;
    l.y1 = hi + pad;
    return l;
}

std::vector<double> value_ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    double step = magnitude;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * magnitude;
        if (step >= raw) break;
    }
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    return ticks;
}

std::string value_label(double v) { return fmt::format("{:.6g}", v); }

// ------------------------------------------------------------------ raster

// 3x5 glyphs for tick labels, one row per entry, bit 2 = leftmost column.
struct Glyph {
    char c;
    std::array<std::uint8_t, 5> rows;
};

constexpr std::array<Glyph, 17> glyphs{{
    {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}}, {'3', {7, 1, 7, 1, 7}},
    {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}}, {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 1, 1}},
    {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 7}}, {'-', {0, 0, 7, 0, 0}}, {':', {0, 2, 0, 2, 0}},
    {'.', {0, 0, 0, 0, 2}}, {'+', {0, 2, 7, 2, 0}}, {'e', {0, 7, 7, 4, 7}}, {' ', {0, 0, 0, 0, 0}},
    {'/', {1, 1, 2, 4, 4}},
}};

constexpr int glyph_scale = 2;
constexpr int glyph_advance = 4 * glyph_scale;

class Raster {
public:
    Raster(int width, int height) : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height * 3, 255) {}

    void blend(int x, int y, Rgb c, double alpha = 1.0) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        auto* p = &pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3];
        p[0] = static_cast<std::uint8_t>(std::lround(p[0] * (1.0 - alpha) + c.r * alpha));
        p[1] = static_cast<std::uint8_t>(std::lround(p[1] * (1.0 - alpha) + c.g * alpha));
        p[2] = static_cast<std::uint8_t>(std::lround(p[2] * (1.0 - alpha) + c.b * alpha));
    }

    void line(double xa, double ya, double xb, double yb, Rgb c, int thickness = 1) {
        const int x0 = static_cast<int>(std::lround(xa)), y0 = static_cast<int>(std::lround(ya));
        const int x1 = static_cast<int>(std::lround(xb)), y1 = static_cast<int>(std::lround(yb));
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        int x = x0, y = y0;
        while (true) {
            for (int t = 0; t < thickness; ++t) blend(x, y + t, c);
            if (x == x1 && y == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y += sy;
            }
        }
    }

    // Fills between two piecewise-linear curves given at increasing x.
    void fill_between(const std::vector<double>& xs, const std::vector<double>& upper, const std::vector<double>& lower, Rgb c,
                      double alpha) {
        std::vector<bool> done(static_cast<std::size_t>(width_), false);
        auto column = [&](int x, double top, double bottom) {
            if (x < 0 || x >= width_ || done[static_cast<std::size_t>(x)]) return;
            done[static_cast<std::size_t>(x)] = true;
            const int a = static_cast<int>(std::lround(std::min(top, bottom)));
            const int b = static_cast<int>(std::lround(std::max(top, bottom)));
            for (int y = a; y <= b; ++y) blend(x, y, c, alpha);
        };
        if (xs.size() == 1) {
            column(static_cast<int>(std::lround(xs[0])), upper[0], lower[0]);
            return;
        }
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const int xa = static_cast<int>(std::lround(xs[i]));
            const int xb = static_cast<int>(std::lround(xs[i + 1]));
            for (int x = xa; x <= xb; ++x) {
                const double f = xb == xa ? 0.0 : static_cast<double>(x - xa) / (xb - xa);
                column(x, upper[i] + (upper[i + 1] - upper[i]) * f, lower[i] + (lower[i + 1] - lower[i]) * f);
            }
        }
    }

    void rect(int x, int y, int w, int h, Rgb c) {
        for (int j = y; j < y + h; ++j) {
            for (int i = x; i < x + w; ++i) blend(i, j, c);
        }
    }

    // Text limited to the glyph set; other characters are skipped.
    void text(int x, int y, std::string_view s, Rgb c) {
        for (char ch : s) {
            const auto it = std::find_if(glyphs.begin(), glyphs.end(), [ch](const Glyph& g) { return g.c == ch; });
            if (it != glyphs.end()) {
                for (int row = 0; row < 5; ++row) {
                    for (int col = 0; col < 3; ++col) {
                        if (it->rows[static_cast<std::size_t>(row)] & (4 >> col)) {
                            rect(x + col * glyph_scale, y + row * glyph_scale, glyph_scale, glyph_scale, c);
                        }
                    }
                }
            }
            x += glyph_advance;
        }
    }

    std::vector<std::uint8_t> encode_png() const {
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (png == nullptr || info == nullptr) {
            png_destroy_write_struct(&png, nullptr);
            throw Error(ErrorCode::io, "cannot initialise the PNG encoder");
        }
        std::vector<std::uint8_t> out;
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw Error(ErrorCode::io, "PNG encoding failed");
        }
        png_set_write_fn(
            png, &out,
            [](png_structp p, png_bytep data, png_size_t length) {
                auto* buffer = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
                buffer->insert(buffer->end(), data, data + length);
            },
            nullptr);
        png_set_IHDR(png, info, static_cast<png_uint_32>(width_), static_cast<png_uint_32>(height_), 8, PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_set_compression_level(png, 9);
        png_write_info(png, info);
        for (int y = 0; y < height_; ++y) {
            png_write_row(png, const_cast<png_bytep>(&pixels_[static_cast<std::size_t>(y) * width_ * 3]));
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        return out;
    }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

std::vector<double> xs_of(const PlotSpec& spec, const Layout& l) {
    std::vector<double> xs;
    xs.reserve(spec.size());
    for (const auto& t : spec.starts) xs.push_back(l.px(t.epoch));
    return xs;
}

// Splits an optional-valued overlay into runs of present values.
template <typename Visit>
void present_runs(const IndexTrace& trace, Visit&& visit) {
    std::size_t i = 0;
    const std::size_t n = trace.values.size();
    while (i < n) {
        while (i < n && !trace.values[i]) ++i;
        std::size_t j = i;
        while (j < n && trace.values[j]) ++j;
        if (j > i) visit(i, j);
        i = j;
    }
}

// ---------------------------------------------------------------- ticks

struct TickStep {
    TimeUnit unit;
    double approx_seconds;
};

const std::vector<TickStep>& tick_steps() {
    static const std::vector<TickStep> steps = {
        {TimeUnit(1, UnitKind::seconds), 1},      {TimeUnit(10, UnitKind::seconds), 10},   {TimeUnit(30, UnitKind::seconds), 30},
        {TimeUnit(1, UnitKind::minutes), 60},     {TimeUnit(5, UnitKind::minutes), 300},   {TimeUnit(15, UnitKind::minutes), 900},
        {TimeUnit(30, UnitKind::minutes), 1800},  {TimeUnit(1, UnitKind::hours), 3600},    {TimeUnit(3, UnitKind::hours), 10800},
        {TimeUnit(6, UnitKind::hours), 21600},    {TimeUnit(12, UnitKind::hours), 43200},  {TimeUnit(1, UnitKind::days), 86400},
        {TimeUnit(2, UnitKind::days), 172800},    {TimeUnit(1, UnitKind::weeks), 604800},  {TimeUnit(1, UnitKind::months), 2629746},
        {TimeUnit(3, UnitKind::months), 7889238}, {TimeUnit(1, UnitKind::years), 31556952}, {TimeUnit(10, UnitKind::years), 315569520},
    };
    return steps;
}

std::string tick_label(Timestamp t, const TimeUnit& unit, std::string_view tz, bool multi_day) {
    const CivilTime c = to_civil(t, tz);
    switch (unit.kind()) {
    case UnitKind::years: return fmt::format("{:04}", c.year);
    case UnitKind::months: return fmt::format("{:04}-{:02}", c.year, c.month);
    case UnitKind::weeks:
    case UnitKind::days: return fmt::format("{:04}-{:02}-{:02}", c.year, c.month, c.day);
    case UnitKind::hours:
    case UnitKind::minutes:
        return multi_day ? fmt::format("{:02}-{:02} {:02}:{:02}", c.month, c.day, c.hour, c.minute)
                         : fmt::format("{:02}:{:02}", c.hour, c.minute);
    case UnitKind::seconds:
        return fmt::format("{:02}:{:02}:{:02}", c.hour, c.minute, static_cast<int>(c.second));
    }
    return {};
}

}  // namespace

std::vector<Tick> time_ticks(Timestamp first, Timestamp last, std::string_view tz, std::size_t max_ticks) {
    if (max_ticks == 0) return {};
    const double span = std::max(last - first, 1.0);
    const auto& steps = tick_steps();
    auto step = std::find_if(steps.begin(), steps.end(),
                             [&](const TickStep& s) { return span / s.approx_seconds <= static_cast<double>(max_ticks); });
    if (step == steps.end()) --step;
    const TimeUnit& unit = step->unit;
    const bool multi_day = to_civil(first, tz).day != to_civil(last, tz).day || span > 86400.0;

    std::vector<Tick> ticks;
    if (unit.is_physical() && unit.kind() != UnitKind::seconds) {
        // Walk single units and keep local wall-clock multiples of the step.
        const TimeUnit single(1, unit.kind());
        Timestamp t = floor(first, single, tz);
        if (t < first) t = shift(t, single, 1, tz);
        for (; t <= last; t = shift(t, single, 1, tz)) {
            const CivilTime c = to_civil(t, tz);
            const int field = unit.kind() == UnitKind::hours ? c.hour : c.minute;
            const bool aligned = unit.kind() == UnitKind::hours ? (c.minute == 0 && c.second == 0.0) : c.second == 0.0;
            if (aligned && field % unit.count() == 0) ticks.push_back(Tick{t, tick_label(t, unit, tz, multi_day)});
        }
    } else {
        const TimeUnit base = unit.kind() == UnitKind::years && unit.count() > 1 ? TimeUnit(1, UnitKind::years)
                              : unit.kind() == UnitKind::months && unit.count() > 1 ? TimeUnit(1, UnitKind::months)
                                                                                     : unit;
        Timestamp t = floor(first, base, tz);
        if (t < first) t = shift(t, base, 1, tz);
        for (; t <= last; t = shift(t, base, 1, tz)) {
            const CivilTime c = to_civil(t, tz);
            if (unit.kind() == UnitKind::years && c.year % unit.count() != 0) continue;
            if (unit.kind() == UnitKind::months && unit.count() > 1 && (c.month - 1) % unit.count() != 0) continue;
            ticks.push_back(Tick{t, tick_label(t, unit, tz, multi_day)});
        }
    }
    return ticks;
}

std::string svg(const PlotSpec& spec, const ImageOptions& options) {
    const Layout l = layout(spec, options);
    const auto xs = xs_of(spec, l);
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
        options.width, options.height);
    auto point = [](double x, double y) { return fmt::format("{:.2f},{:.2f}", x, y); };

    for (double v : value_ticks(l.y0, l.y1)) {
        const double y = l.py(v);
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n", l.left, y, l.plot_right(), y,
                           hex(grid_color));
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", l.left - 6, y + 4, value_label(v));
    }
    for (const auto& tick : time_ticks(Timestamp{l.x0}, Timestamp{l.x1}, spec.tz)) {
        const double x = l.px(tick.t.epoch);
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n", x, l.top, x, l.plot_bottom(),
                           hex(grid_color));
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", x, l.plot_bottom() + 16, tick.label);
    }

    for (const auto& index : spec.indexes) {
        const bool loss = index.name == index_names::data_loss;
        const Rgb color = loss ? loss_color : index.name == index_names::anomaly ? anomaly_color : other_index_color;
        present_runs(index, [&](std::size_t from, std::size_t to) {
            std::string pts;
            for (std::size_t i = from; i < to; ++i) pts += point(xs[i], l.pi(*index.values[i])) + " ";
            if (loss) {
                pts = point(xs[from], l.plot_bottom()) + " " + pts + point(xs[to - 1], l.plot_bottom());
                out += fmt::format("<polygon class=\"index-{}\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.3\"/>\n", index.name, pts, hex(color));
            } else {
                out += fmt::format("<polyline class=\"index-{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n", index.name,
                                   pts, hex(color));
            }
        });
    }

    for (std::size_t k = 0; k < spec.labels.size(); ++k) {
        const auto& trace = spec.labels[k];
        const Rgb color = palette[k % palette.size()];
        if (!trace.band_min.empty()) {
            std::string pts;
            for (std::size_t i = 0; i < xs.size(); ++i) pts += point(xs[i], l.py(trace.band_max[i])) + " ";
            for (std::size_t i = xs.size(); i-- > 0;) pts += point(xs[i], l.py(trace.band_min[i])) + " ";
            out += fmt::format("<polygon class=\"band\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.25\"/>\n", pts, hex(color));
        }
        std::string pts;
        for (std::size_t i = 0; i < xs.size(); ++i) pts += point(xs[i], l.py(trace.values[i])) + " ";
        out += fmt::format("<polyline class=\"line\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", pts, hex(color));
        out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"12\" height=\"4\" fill=\"{}\"/>", l.left + 10, l.top + 8 + 14.0 * k,
                           hex(color));
        std::string escaped;
        for (char c : trace.label) {
            if (c == '<') escaped += "&lt;";
            else if (c == '&') escaped += "&amp;";
            else if (c == '>') escaped += "&gt;";
            else escaped += c;
        }
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", l.left + 26, l.top + 14 + 14.0 * k, escaped);
    }
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"{}\"/>\n", l.left, l.top,
                       l.plot_right() - l.left, l.plot_bottom() - l.top, hex(axis_color));
    out += "</svg>\n";
    return out;
}

std::vector<std::uint8_t> png(const PlotSpec& spec, const ImageOptions& options) {
    const Layout l = layout(spec, options);
    const auto xs = xs_of(spec, l);
    Raster r(options.width, options.height);

    for (double v : value_ticks(l.y0, l.y1)) {
        const double y = l.py(v);
        r.line(l.left, y, l.plot_right(), y, grid_color);
        const std::string label = value_label(v);
        r.text(static_cast<int>(l.left) - 6 - glyph_advance * static_cast<int>(label.size()), static_cast<int>(y) - 5, label, axis_color);
    }
    for (const auto& tick : time_ticks(Timestamp{l.x0}, Timestamp{l.x1}, spec.tz)) {
        const double x = l.px(tick.t.epoch);
        r.line(x, l.top, x, l.plot_bottom(), grid_color);
        r.text(static_cast<int>(x) - glyph_advance * static_cast<int>(tick.label.size()) / 2, static_cast<int>(l.plot_bottom()) + 8,
               tick.label, axis_color);
    }

    for (const auto& index : spec.indexes) {
        const bool loss = index.name == index_names::data_loss;
        const Rgb color = loss ? loss_color : index.name == index_names::anomaly ? anomaly_color : other_index_color;
        present_runs(index, [&](std::size_t from, std::size_t to) {
            std::vector<double> x(xs.begin() + static_cast<std::ptrdiff_t>(from), xs.begin() + static_cast<std::ptrdiff_t>(to));
            std::vector<double> y;
            for (std::size_t i = from; i < to; ++i) y.push_back(l.pi(*index.values[i]));
            if (loss) {
                r.fill_between(x, y, std::vector<double>(y.size(), l.plot_bottom()), color, 0.3);
            } else {
                for (std::size_t i = 0; i + 1 < x.size(); ++i) r.line(x[i], y[i], x[i + 1], y[i + 1], color);
            }
        });
    }

    for (std::size_t k = 0; k < spec.labels.size(); ++k) {
        const auto& trace = spec.labels[k];
        const Rgb color = palette[k % palette.size()];
        if (!trace.band_min.empty()) {
            std::vector<double> upper, lower;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                upper.push_back(l.py(trace.band_max[i]));
                lower.push_back(l.py(trace.band_min[i]));
            }
            r.fill_between(xs, upper, lower, color, 0.25);
        }
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            r.line(xs[i], l.py(trace.values[i]), xs[i + 1], l.py(trace.values[i + 1]), color, 2);
        }
        r.rect(static_cast<int>(l.left) + 10, static_cast<int>(l.top) + 8 + 14 * static_cast<int>(k), 12, 4, color);
    }
    r.line(l.left, l.top, l.plot_right(), l.top, axis_color);
    r.line(l.left, l.plot_bottom(), l.plot_right(), l.plot_bottom(), axis_color);
    r.line(l.left, l.top, l.left, l.plot_bottom(), axis_color);
    r.line(l.plot_right(), l.top, l.plot_right(), l.plot_bottom(), axis_color);
    return r.encode_png();
}

void render_image(const PlotSpec& spec, const std::filesystem::path& path, const ImageOptions& options) {
    std::string extension = path.extension().string();
    std::transform(extension.begin(), extension.end(), extension.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (extension == ".svg") {
        io::write_file(path, svg(spec, options));
    } else if (extension == ".png") {
        const auto bytes = png(spec, options);
        io::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    } else {
        throw Error(ErrorCode::invalid_argument, fmt::format("unsupported image format '{}' (use .png or .svg)", path.extension().string()));
    }
}

}  // namespace chronoseries::plot
