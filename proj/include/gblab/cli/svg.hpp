#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "gblab/core/errors.hpp"

namespace gblab::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::ofstream open_svg(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    return os;
}

} // namespace detail

/// Polyline plot; log axes take log10 of positive values and drop the rest.
inline void write_line_plot(const std::string& path, const std::string& title, const std::vector<Series>& series,
                            bool logx = false, bool logy = false, const std::string& xlabel = "x",
                            const std::string& ylabel = "y") {
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    const double W = 640, H = 420, L = 70, R = 20, Tp = 40, B = 50;
    std::vector<Series> s = series;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto& se : s) {
        Series out{se.label, {}, {}};
        for (std::size_t i = 0; i < se.x.size(); ++i) {
            double x = se.x[i], y = se.y[i];
            if ((logx && !(x > 0)) || (logy && !(y > 0)) || !std::isfinite(x) || !std::isfinite(y)) continue;
            if (logx) x = std::log10(x);
            if (logy) y = std::log10(y);
            out.x.push_back(x);
            out.y.push_back(y);
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        se = out;
    }
    if (x0 > x1) x0 = 0, x1 = 1;
    if (y0 > y1) y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-300) x1 = x0 + 1;
    if (y1 - y0 < 1e-300) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - B - Tp); };

    auto os = detail::open_svg(path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << Tp << "\" width=\"" << W - L - R << "\" height=\"" << H - B - Tp
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"11\">" << detail::fmt(x0) << "</text>\n";
    os << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(x1)
       << "</text>\n";
    os << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(y0) << "</text>\n";
    os << "<text x=\"" << L - 4 << "\" y=\"" << Tp + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(y1)
       << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << (logx ? "log10 " : "") << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2 << ")\">"
       << (logy ? "log10 " : "") << ylabel << "</text>\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        const char* c = colours[k % 5];
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s[k].x.size(); ++i) os << detail::fmt(px(s[k].x[i])) << "," << detail::fmt(py(s[k].y[i])) << " ";
        os << "\"/>\n";
        if (s[k].x.size() < 50)
            for (std::size_t i = 0; i < s[k].x.size(); ++i)
                os << "<circle cx=\"" << detail::fmt(px(s[k].x[i])) << "\" cy=\"" << detail::fmt(py(s[k].y[i]))
                   << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        os << "<text x=\"" << L + 8 << "\" y=\"" << Tp + 16 + 14 * k << "\" font-size=\"12\" fill=\"" << c << "\">" << s[k].label
           << "</text>\n";
    }
    os << "</svg>\n";
}

/// Heatmap of a rows x cols row-major array, row 0 at the bottom, grey scale from min to max.
inline void write_heatmap(const std::string& path, const std::string& title, const std::vector<double>& v, std::size_t rows,
                          std::size_t cols) {
    if (v.size() != rows * cols) throw ParameterError("write_heatmap: size mismatch");
    const double cell = std::max(1.0, std::min(4.0, 512.0 / static_cast<double>(std::max(rows, cols))));
    const double W = cell * static_cast<double>(cols), H = cell * static_cast<double>(rows) + 30;
    double lo = 1e300, hi = -1e300;
    for (double x : v)
        if (std::isfinite(x)) lo = std::min(lo, x), hi = std::max(hi, x);
    if (!(hi > lo)) hi = lo + 1;
    auto os = detail::open_svg(path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" shape-rendering=\"crispEdges\">\n";
    os << "<text x=\"4\" y=\"18\" font-size=\"13\">" << title << " [" << detail::fmt(lo) << ", " << detail::fmt(hi) << "]</text>\n";
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = v[r * cols + c];
            const int g = std::isfinite(x) ? static_cast<int>(std::lround(255.0 * (x - lo) / (hi - lo))) : 0;
            os << "<rect x=\"" << detail::fmt(cell * static_cast<double>(c)) << "\" y=\""
               << detail::fmt(30 + cell * static_cast<double>(rows - 1 - r)) << "\" width=\"" << cell << "\" height=\"" << cell
               << "\" fill=\"rgb(" << g << "," << g << "," << g << ")\"/>\n";
        }
    os << "</svg>\n";
}

} // namespace gblab::cli
