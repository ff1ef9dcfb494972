#pragma once

// Self-contained SVG line plots: inline styling, fixed 800x500 viewBox, no
// external assets. Enough for sweep curves and field profiles.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace hlmax {

struct PlotSeries {
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    PlotSeries series;
    double asymptote = std::numeric_limits<double>::quiet_NaN();  // horizontal rule
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace detail

inline std::string render_line_plot(const PlotSpec& spec) {
    const double W = 800, H = 500;
    const double ml = 70, mr = 25, mt = 45, mb = 55;  // margins
    const double pw = W - ml - mr, ph = H - mt - mb;

    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    if (!spec.series.x.empty()) {
        x_lo = *std::min_element(spec.series.x.begin(), spec.series.x.end());
        x_hi = *std::max_element(spec.series.x.begin(), spec.series.x.end());
        y_lo = *std::min_element(spec.series.y.begin(), spec.series.y.end());
        y_hi = *std::max_element(spec.series.y.begin(), spec.series.y.end());
    }
    if (std::isfinite(spec.asymptote)) {
        y_lo = std::min(y_lo, spec.asymptote);
        y_hi = std::max(y_hi, spec.asymptote);
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    if (y_hi <= y_lo) y_hi = y_lo + 1;
    const double ypad = 0.06 * (y_hi - y_lo);
    y_lo -= ypad;
    y_hi += ypad;

    auto px = [&](double x) { return ml + pw * (x - x_lo) / (x_hi - x_lo); };
    auto py = [&](double y) { return mt + ph * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
    out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    out += "<text x=\"400\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + spec.title + "</text>\n";

    // axes
    out += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
           detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(mt + ph) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt + ph) + "\" x2=\"" +
           detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(mt + ph) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // ticks
    for (int i = 0; i <= 5; ++i) {
        const double tx = x_lo + (x_hi - x_lo) * i / 5.0;
        const double ty = y_lo + (y_hi - y_lo) * i / 5.0;
        char label[32];
        out += "<line x1=\"" + detail::svg_num(px(tx)) + "\" y1=\"" + detail::svg_num(mt + ph) +
               "\" x2=\"" + detail::svg_num(px(tx)) + "\" y2=\"" + detail::svg_num(mt + ph + 5) +
               "\" stroke=\"black\"/>\n";
        std::snprintf(label, sizeof(label), "%.4g", tx);
        out += "<text x=\"" + detail::svg_num(px(tx)) + "\" y=\"" + detail::svg_num(mt + ph + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + label +
               "</text>\n";
        out += "<line x1=\"" + detail::svg_num(ml - 5) + "\" y1=\"" + detail::svg_num(py(ty)) +
               "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(py(ty)) +
               "\" stroke=\"black\"/>\n";
        std::snprintf(label, sizeof(label), "%.4g", ty);
        out += "<text x=\"" + detail::svg_num(ml - 9) + "\" y=\"" + detail::svg_num(py(ty) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label +
               "</text>\n";
    }

    // axis labels
    out += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" + detail::svg_num(H - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + spec.x_label +
           "</text>\n";
    out += "<text x=\"18\" y=\"" + detail::svg_num(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
           "18 " + detail::svg_num(mt + ph / 2) + ")\">" + spec.y_label + "</text>\n";

    if (std::isfinite(spec.asymptote)) {
        out += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(py(spec.asymptote)) +
               "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" +
               detail::svg_num(py(spec.asymptote)) +
               "\" stroke=\"#b22222\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
    }

    if (!spec.series.x.empty()) {
        std::string pts;
        for (std::size_t i = 0; i < spec.series.x.size(); ++i) {
            if (i) pts += ' ';
            pts += detail::svg_num(px(spec.series.x[i])) + "," + detail::svg_num(py(spec.series.y[i]));
        }
        out += "<polyline points=\"" + pts +
               "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
        for (std::size_t i = 0; i < spec.series.x.size(); ++i) {
            out += "<circle cx=\"" + detail::svg_num(px(spec.series.x[i])) + "\" cy=\"" +
                   detail::svg_num(py(spec.series.y[i])) + "\" r=\"3\" fill=\"#1f77b4\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace hlmax
