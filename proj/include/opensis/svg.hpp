#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace opensis {
namespace svg {

struct Series {
    std::string label;
    std::string color;
    std::string dash; // SVG dasharray, empty for solid
    std::vector<double> x, y;
};

struct Chart {
    std::string title;
    std::string xlabel, ylabel;
    std::vector<Series> series;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

inline std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// round limits outward to a tidy tick step
inline std::vector<double> ticks(double lo, double hi, int target) {
    if (!(hi > lo)) hi = lo + 1.0;
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> out;
    const double first = std::ceil(lo / step - 1e-9) * step;
    for (double v = first; v <= hi + 1e-9 * step; v += step)
        out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    return out;
}

} // namespace detail

// Stacked line-chart panels sharing a file. Enough for trajectory and
// moment plots; not a general plotting library.
inline std::string render(const std::vector<Chart>& charts, int width = 880,
                          int panel_height = 340) {
    const double ml = 72, mr = 24, mt = 40, mb = 52;
    const int total_height = panel_height * static_cast<int>(charts.size());
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(total_height) + "\" font-family=\"sans-serif\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t ci = 0; ci < charts.size(); ++ci) {
        const Chart& chart = charts[ci];
        const double top = static_cast<double>(panel_height) * ci;
        const double x0 = ml, x1 = width - mr;
        const double y0 = top + mt, y1 = top + panel_height - mb;

        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const auto& s : chart.series) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (std::isnan(s.y[i])) continue;
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
        if (!(xmax > xmin)) { xmin = 0; xmax = 1; }
        if (!(ymax > ymin)) { ymax = ymin + 1; }
        ymin = std::min(ymin, 0.0);
        ymax += (ymax - ymin) * 0.05;

        auto px = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); };
        auto py = [&](double y) { return y1 - (y - ymin) / (ymax - ymin) * (y1 - y0); };

        out += "<text x=\"" + detail::fmt_px((x0 + x1) / 2) + "\" y=\"" + detail::fmt_px(top + 20) +
               "\" text-anchor=\"middle\" font-size=\"15\">" + chart.title + "</text>\n";

        for (double t : detail::ticks(xmin, xmax, 8)) {
            const double x = px(t);
            out += "<line x1=\"" + detail::fmt_px(x) + "\" y1=\"" + detail::fmt_px(y1) +
                   "\" x2=\"" + detail::fmt_px(x) + "\" y2=\"" + detail::fmt_px(y0) +
                   "\" stroke=\"#dddddd\"/>\n";
            out += "<text x=\"" + detail::fmt_px(x) + "\" y=\"" + detail::fmt_px(y1 + 18) +
                   "\" text-anchor=\"middle\" font-size=\"12\">" + detail::fmt(t) + "</text>\n";
        }
        for (double t : detail::ticks(ymin, ymax, 6)) {
            const double y = py(t);
            out += "<line x1=\"" + detail::fmt_px(x0) + "\" y1=\"" + detail::fmt_px(y) +
                   "\" x2=\"" + detail::fmt_px(x1) + "\" y2=\"" + detail::fmt_px(y) +
                   "\" stroke=\"#dddddd\"/>\n";
            out += "<text x=\"" + detail::fmt_px(x0 - 6) + "\" y=\"" + detail::fmt_px(y + 4) +
                   "\" text-anchor=\"end\" font-size=\"12\">" + detail::fmt(t) + "</text>\n";
        }
        out += "<rect x=\"" + detail::fmt_px(x0) + "\" y=\"" + detail::fmt_px(y0) + "\" width=\"" +
               detail::fmt_px(x1 - x0) + "\" height=\"" + detail::fmt_px(y1 - y0) +
               "\" fill=\"none\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::fmt_px((x0 + x1) / 2) + "\" y=\"" +
               detail::fmt_px(top + panel_height - 14) +
               "\" text-anchor=\"middle\" font-size=\"13\">" + chart.xlabel + "</text>\n";
        out += "<text x=\"18\" y=\"" + detail::fmt_px((y0 + y1) / 2) +
               "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
               detail::fmt_px((y0 + y1) / 2) + ")\">" + chart.ylabel + "</text>\n";

        double legend_y = y0 + 16;
        for (const auto& s : chart.series) {
            std::string points;
            bool open = false;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (std::isnan(s.y[i])) {
                    open = false;
                    continue;
                }
                points += open ? " L" : " M";
                points += detail::fmt_px(px(s.x[i])) + " " + detail::fmt_px(py(s.y[i]));
                open = true;
            }
            out += "<path d=\"" + points + "\" fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"1.6\"" +
                   (s.dash.empty() ? "" : " stroke-dasharray=\"" + s.dash + "\"") + "/>\n";
            if (!s.label.empty()) {
                out += "<line x1=\"" + detail::fmt_px(x1 - 150) + "\" y1=\"" +
                       detail::fmt_px(legend_y - 4) + "\" x2=\"" + detail::fmt_px(x1 - 120) +
                       "\" y2=\"" + detail::fmt_px(legend_y - 4) + "\" stroke=\"" + s.color +
                       "\" stroke-width=\"1.6\"" +
                       (s.dash.empty() ? "" : " stroke-dasharray=\"" + s.dash + "\"") + "/>\n";
                out += "<text x=\"" + detail::fmt_px(x1 - 114) + "\" y=\"" +
                       detail::fmt_px(legend_y) + "\" font-size=\"12\">" + s.label + "</text>\n";
                legend_y += 16;
            }
        }
    }
    out += "</svg>\n";
    return out;
}

inline void write(const std::string& path, const std::vector<Chart>& charts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << render(charts);
}

} // namespace svg
} // namespace opensis
