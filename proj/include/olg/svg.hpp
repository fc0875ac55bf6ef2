#pragma once

#include <optional>
#include <string>
#include <vector>

namespace olg::svg {

/// Number formatting shared by CSV output and chart labels, so every label
/// drawn on a chart appears verbatim in some CSV.
std::string format_value(double v);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

struct RenderOptions {
    int width = 760;
    int height = 460;
    std::optional<std::string> timestamp;  ///< embedded as a comment when set
};

/// Static line chart; axes span the data extents, which are the only tick labels.
std::string render(const LineChart& chart, const RenderOptions& opts = {});

std::string escape_xml(const std::string& text);

}  // namespace olg::svg
