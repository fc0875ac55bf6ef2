#include "olg/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace olg::svg {
namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f4e79", "#c0392b", "#27864a", "#8e44ad",
                                                 "#d68910", "#17a2b8", "#5d6d7e", "#a04000"};

struct Extent {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    [[nodiscard]] bool valid() const { return lo <= hi; }
};

}  // namespace

std::string format_value(double v) {
    if (v == 0.0) return "0";  // folds -0
    return fmt::format("{:.10g}", v);
}

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
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

std::string render(const LineChart& chart, const RenderOptions& opts) {
    Extent ex;
    Extent ey;
    for (const auto& s : chart.series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series '" + s.name + "' has mismatched x and y");
        for (double v : s.x) ex.add(v);
        for (double v : s.y) ey.add(v);
    }
    if (!ex.valid()) ex = {0.0, 1.0};
    if (!ey.valid()) ey = {0.0, 0.0};

    // Degenerate spans are padded for drawing only; labels keep the data values.
    const double x_lo = ex.lo;
    const double x_span = ex.hi > ex.lo ? ex.hi - ex.lo : 1.0;
    const double y_pad = ey.hi > ey.lo ? 0.0 : 1.0;
    const double y_lo = ey.lo - y_pad;
    const double y_span = ey.hi > ey.lo ? ey.hi - ey.lo : 2.0;

    const double left = 80.0;
    const double right = 190.0;
    const double top = 40.0;
    const double bottom = 60.0;
    const double plot_w = opts.width - left - right;
    const double plot_h = opts.height - top - bottom;
    auto px = [&](double x) { return left + (x - x_lo) / x_span * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - y_lo) / y_span * plot_h; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        opts.width, opts.height);
    if (opts.timestamp) out += fmt::format("<!-- generated {} -->\n", escape_xml(*opts.timestamp));
    out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", opts.width, opts.height);
    out += fmt::format("<text x=\"{:.1f}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                       left + plot_w / 2, escape_xml(chart.title));

    // Frame and axis labels.
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"#444\"/>\n",
                       left, top, plot_w, plot_h);
    if (y_lo < 0.0 && y_lo + y_span > 0.0) {
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.2f}\" x2=\"{:.1f}\" y2=\"{:.2f}\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n",
                           left, py(0.0), left + plot_w, py(0.0));
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"start\">{}</text>\n", left, top + plot_h + 18,
                       format_value(ex.lo));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left + plot_w,
                       top + plot_h + 18, format_value(ex.hi));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left - 6, py(ey.lo) + 4,
                       format_value(ey.lo));
    if (ey.hi > ey.lo) {
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left - 6, py(ey.hi) + 4,
                           format_value(ey.hi));
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", left + plot_w / 2,
                       top + plot_h + 40, escape_xml(chart.x_label));
    out += fmt::format(
        "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">{1}</text>\n",
        top + plot_h / 2, escape_xml(chart.y_label));

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = kPalette[k % kPalette.size()];
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i > 0) points += ' ';
            points += fmt::format("{:.2f},{:.2f}", px(s.x[i]), py(s.y[i]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n", color, points);
        const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
        out += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                           left + plot_w + 12, ly - 4, left + plot_w + 32, color);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + plot_w + 38, ly, escape_xml(s.name));
    }
    out += "</svg>\n";
    return out;
}

}  // namespace olg::svg
