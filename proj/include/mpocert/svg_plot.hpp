#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace mpocert {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    std::vector<double> reference_lines;  // horizontal dashed lines, e.g. -lambda
};

namespace detail {

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// Static SVG line chart with markers; deterministic output for identical input.
inline std::string render_svg(const LinePlot& p, int width = 640, int height = 420) {
    const double ml = 70, mr = 150, mt = 40, mb = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : p.series) {
        for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : s.y)
            if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    for (double r : p.reference_lines) y0 = std::min(y0, r), y1 = std::max(y1, r);
    if (!std::isfinite(x0)) x0 = 0, x1 = 1;
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 1, x1 += 1;
    if (y1 == y0) y0 -= 1, y1 += 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double v) { return ml + (v - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return mt + (y1 - v) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(2);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2.0 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << detail::xml_escape(p.title) << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        o << "<text x=\"" << sx(xv) << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
          << detail::fmt_tick(xv) << "</text>\n";
        o << "<text x=\"" << ml - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << detail::fmt_tick(yv)
          << "</text>\n";
        o << "<line x1=\"" << ml << "\" x2=\"" << ml + pw << "\" y1=\"" << sy(yv) << "\" y2=\"" << sy(yv)
          << "\" stroke=\"#eee\"/>\n";
    }
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
      << detail::xml_escape(p.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << mt + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << detail::xml_escape(p.y_label) << "</text>\n";
    for (double r : p.reference_lines)
        o << "<line x1=\"" << ml << "\" x2=\"" << ml + pw << "\" y1=\"" << sy(r) << "\" y2=\"" << sy(r)
          << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        const char* c = colors[k % 6];
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            o << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
        }
        o << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (std::isfinite(s.y[i]))
                o << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        const double ly = mt + 14 + 18.0 * static_cast<double>(k);
        o << "<line x1=\"" << ml + pw + 10 << "\" x2=\"" << ml + pw + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
          << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << ml + pw + 34 << "\" y=\"" << ly + 4 << "\">" << detail::xml_escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace mpocert
