#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace powermap {

// Minimal native SVG scatter/line plotting: axes, ticks, a blue-to-red
// color ramp for continuous values, a fixed palette for categories.
// Output is canonical (fixed float formatting) so reruns are byte-identical.

struct PlotPoint {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;   // continuous color (e.g. power)
    long category = -1;   // >= 0 selects a palette color instead
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotPoint> points;
    bool connect = false;  // polyline through points (trend/cost plots)
    double value_lo = 0.0, value_hi = 1.0;
};

namespace detail_svg {

inline std::string num(double v) {
    if (!std::isfinite(v)) return "0";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string ramp_color(double t) {
    t = std::min(1.0, std::max(0.0, t));
    const int r = static_cast<int>(std::lround(40 + 215 * t));
    const int g = static_cast<int>(std::lround(60 + 40 * (1.0 - std::fabs(t - 0.5) * 2.0)));
    const int b = static_cast<int>(std::lround(255 - 215 * t));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

inline std::string palette_color(long c) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[static_cast<std::size_t>(c) % 10];
}

struct AxisScale {
    double lo = 0.0, hi = 1.0;
    double map(double v, double pix_lo, double pix_hi) const {
        if (hi <= lo) return 0.5 * (pix_lo + pix_hi);
        return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo);
    }
};

inline AxisScale fit_axis(const std::vector<double>& values) {
    AxisScale s;
    if (values.empty()) return {0.0, 1.0};
    s.lo = *std::min_element(values.begin(), values.end());
    s.hi = *std::max_element(values.begin(), values.end());
    if (s.hi <= s.lo) {
        s.lo -= 0.5;
        s.hi += 0.5;
    }
    const double pad = 0.05 * (s.hi - s.lo);
    s.lo -= pad;
    s.hi += pad;
    return s;
}

}  // namespace detail_svg

inline std::string render_svg(const PlotSpec& spec) {
    using namespace detail_svg;
    const double width = 800, height = 600;
    const double ml = 70, mr = 30, mt = 40, mb = 60;
    std::vector<double> xs, ys;
    for (const auto& p : spec.points) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    const AxisScale ax = fit_axis(xs);
    const AxisScale ay = fit_axis(ys);
    auto px = [&](double x) { return ax.map(x, ml, width - mr); };
    auto py = [&](double y) { return ay.map(y, height - mb, mt); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
           num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" + spec.title + "</text>\n";
    // axes
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(height - mb) + "\" x2=\"" +
           num(width - mr) + "\" y2=\"" + num(height - mb) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
           "\" y2=\"" + num(height - mb) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    // ticks
    for (int i = 0; i <= 5; ++i) {
        const double fx = ax.lo + (ax.hi - ax.lo) * i / 5.0;
        const double fy = ay.lo + (ay.hi - ay.lo) * i / 5.0;
        svg += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(height - mb) + "\" x2=\"" +
               num(px(fx)) + "\" y2=\"" + num(height - mb + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(height - mb + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               num(fx) + "</text>\n";
        svg += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" + num(ml) +
               "\" y2=\"" + num(py(fy)) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(fy) +
               "</text>\n";
    }
    svg += "<text x=\"" + num((ml + width - mr) / 2) + "\" y=\"" + num(height - 15) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           spec.x_label + "</text>\n";
    svg += "<text x=\"20\" y=\"" + num((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " + num((mt + height - mb) / 2) + ")\">" + spec.y_label +
           "</text>\n";
    if (spec.connect && spec.points.size() > 1) {
        std::string path = "<polyline fill=\"none\" stroke=\"#555555\" stroke-width=\"1.5\" "
                           "points=\"";
        for (const auto& p : spec.points) path += num(px(p.x)) + "," + num(py(p.y)) + " ";
        path += "\"/>\n";
        svg += path;
    }
    for (const auto& p : spec.points) {
        std::string color;
        if (p.category >= 0) {
            color = palette_color(p.category);
        } else {
            const double span = spec.value_hi - spec.value_lo;
            color = ramp_color(span > 0 ? (p.value - spec.value_lo) / span : 0.5);
        }
        svg += "<circle cx=\"" + num(px(p.x)) + "\" cy=\"" + num(py(p.y)) +
               "\" r=\"3\" fill=\"" + color + "\" fill-opacity=\"0.8\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void write_svg(const PlotSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_svg: cannot open " + path);
    out << render_svg(spec);
}

}  // namespace powermap
