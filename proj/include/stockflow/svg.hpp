#pragma once

#include <string>
#include <vector>

namespace stockflow {

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    int width = 960;
    int height = 600;
    std::string x_label;
    std::string y_label;
    std::string title;
};

/// Renders a line chart as standalone SVG text: one polyline per series,
/// linear axes with tick labels, and a legend. Output is a pure function
/// of the inputs — repeated calls produce byte-identical text, so golden
/// files stay stable.
std::string render_line_chart(const std::vector<ChartSeries>& series,
                              const ChartOptions& options = {});

} // namespace stockflow
