#include "stockflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "stockflow/numfmt.hpp"

namespace stockflow {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#ff7f0e", "#9467bd", "#8c564b"};

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Tick spacing as 1/2/5 times a power of ten, aiming for ~6 intervals.
double nice_step(double range) {
    const double raw = range / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm <= 1.0) return mag;
    if (norm <= 2.0) return 2.0 * mag;
    if (norm <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_line_chart(const std::vector<ChartSeries>& series,
                              const ChartOptions& options) {
    if (series.empty()) {
        throw std::invalid_argument("render_line_chart: no series");
    }
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) {
            throw std::invalid_argument("render_line_chart: x/y length mismatch in '" +
                                        s.label + "'");
        }
        if (s.x.empty()) {
            throw std::invalid_argument("render_line_chart: empty series '" + s.label + "'");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                throw std::invalid_argument("render_line_chart: non-finite point in '" +
                                            s.label + "'");
            }
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (xmax == xmin) { xmin -= 1.0; xmax += 1.0; }
    if (ymax == ymin) { ymin -= 1.0; ymax += 1.0; }

    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double w = options.width, h = options.height;
    const double pw = w - ml - mr, ph = h - mt - mb;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
           std::to_string(options.width) + " " + std::to_string(options.height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (!options.title.empty()) {
        out += "<text x=\"" + px(w / 2) + "\" y=\"24\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"16\">" +
               escape(options.title) + "</text>\n";
    }

    // Grid lines and tick labels.
    const double xstep = nice_step(xmax - xmin);
    const double ystep = nice_step(ymax - ymin);
    out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep) {
        out += "<line x1=\"" + px(sx(x)) + "\" y1=\"" + px(mt) + "\" x2=\"" + px(sx(x)) +
               "\" y2=\"" + px(mt + ph) + "\" stroke=\"#ddd\"/>\n";
        out += "<text x=\"" + px(sx(x)) + "\" y=\"" + px(mt + ph + 16) +
               "\" text-anchor=\"middle\">" + format_number(x) + "</text>\n";
    }
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep; y += ystep) {
        out += "<line x1=\"" + px(ml) + "\" y1=\"" + px(sy(y)) + "\" x2=\"" + px(ml + pw) +
               "\" y2=\"" + px(sy(y)) + "\" stroke=\"#ddd\"/>\n";
        out += "<text x=\"" + px(ml - 6) + "\" y=\"" + px(sy(y) + 4) +
               "\" text-anchor=\"end\">" + format_number(y) + "</text>\n";
    }
    out += "</g>\n";

    // Axes.
    out += "<line x1=\"" + px(ml) + "\" y1=\"" + px(mt + ph) + "\" x2=\"" + px(ml + pw) +
           "\" y2=\"" + px(mt + ph) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + px(ml) + "\" y1=\"" + px(mt) + "\" x2=\"" + px(ml) + "\" y2=\"" +
           px(mt + ph) + "\" stroke=\"black\"/>\n";
    if (!options.x_label.empty()) {
        out += "<text x=\"" + px(ml + pw / 2) + "\" y=\"" + px(h - 12) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape(options.x_label) + "</text>\n";
    }
    if (!options.y_label.empty()) {
        out += "<text x=\"16\" y=\"" + px(mt + ph / 2) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "transform=\"rotate(-90 16 " + px(mt + ph / 2) + ")\">" +
               escape(options.y_label) + "</text>\n";
    }

    // Data polylines.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        out += "<polyline fill=\"none\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[si].x.size(); ++i) {
            if (i) out += ' ';
            out += px(sx(series[si].x[i])) + "," + px(sy(series[si].y[i]));
        }
        out += "\"/>\n";
    }

    // Legend, top right.
    double ly = mt + 8;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        const double lx = ml + pw - 150;
        out += "<line x1=\"" + px(lx) + "\" y1=\"" + px(ly) + "\" x2=\"" + px(lx + 24) +
               "\" y2=\"" + px(ly) + "\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + px(lx + 30) + "\" y=\"" + px(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape(series[si].label) + "</text>\n";
        ly += 18;
    }

    out += "</svg>\n";
    return out;
}

} // namespace stockflow
