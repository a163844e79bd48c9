#pragma once

// Self-contained SVG writers for the two plot kinds the CLI emits: 2-D
// scatter of user vectors colored by party, and a confusion-matrix heatmap.
// Output is plain text built with fixed-precision numbers, so identical
// inputs give byte-identical files.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "common.hpp"
#include "metrics.hpp"

namespace polemb {

namespace detail {

// Fixed two-decimal formatting keeps coordinates compact and stable.
inline std::string svg_num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

// White at t=0 to a deep blue at t=1.
inline std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r0 = 255, g0 = 255, b0 = 255;
    const int r1 = 0x08, g1 = 0x51, b1 = 0x9c;
    int r = static_cast<int>(r0 + (r1 - r0) * t + 0.5);
    int g = static_cast<int>(g0 + (g1 - g0) * t + 0.5);
    int b = static_cast<int>(b0 + (b1 - b0) * t + 0.5);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return std::string(buf);
}

}  // namespace detail

struct ScatterPoint {
    double x = 0;
    double y = 0;
    int cls = 0;
};

// Scatter plot of 2-D points. class_names/class_colors are indexed by
// ScatterPoint::cls; the legend lists every class, present or not.
inline std::string scatter_svg(const std::vector<ScatterPoint>& points,
                               const std::vector<std::string>& class_names,
                               const std::vector<std::string>& class_colors,
                               const std::string& title = "") {
    using detail::svg_num;
    using detail::xml_escape;
    if (class_names.size() != class_colors.size())
        throw DataError("scatter_svg: class name/color count mismatch");
    for (const auto& p : points)
        if (p.cls < 0 || static_cast<std::size_t>(p.cls) >= class_names.size())
            throw DataError("scatter_svg: point class out of range");

    const double plot = 560.0;
    const double mleft = 40.0, mtop = 60.0, mbottom = 40.0;
    const double legend_w = class_names.empty() ? 0.0 : 170.0;
    const double width = mleft + plot + 30.0 + legend_w;
    const double height = mtop + plot + mbottom;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!points.empty()) {
        xmin = xmax = points[0].x;
        ymin = ymax = points[0].y;
        for (const auto& p : points) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    // Pad 5% per side; degenerate extents get a unit window.
    double xr = xmax - xmin, yr = ymax - ymin;
    if (xr <= 0) { xmin -= 0.5; xr = 1.0; }
    if (yr <= 0) { ymin -= 0.5; yr = 1.0; }
    xmin -= 0.05 * xr;
    ymin -= 0.05 * yr;
    xr *= 1.1;
    yr *= 1.1;

    auto px = [&](double x) { return mleft + (x - xmin) / xr * plot; };
    // SVG y grows downward.
    auto py = [&](double y) { return mtop + plot - (y - ymin) / yr * plot; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) + "\" height=\"" +
         svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) + " " + svg_num(height) + "\">\n";
    s += "<rect width=\"" + svg_num(width) + "\" height=\"" + svg_num(height) + "\" fill=\"#ffffff\"/>\n";
    if (!title.empty())
        s += "<text x=\"" + svg_num(mleft + plot / 2) +
             "\" y=\"32\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">" +
             xml_escape(title) + "</text>\n";
    s += "<rect x=\"" + svg_num(mleft) + "\" y=\"" + svg_num(mtop) + "\" width=\"" + svg_num(plot) +
         "\" height=\"" + svg_num(plot) + "\" fill=\"none\" stroke=\"#888888\"/>\n";
    for (const auto& p : points) {
        s += "<circle cx=\"" + svg_num(px(p.x)) + "\" cy=\"" + svg_num(py(p.y)) +
             "\" r=\"3\" fill=\"" + class_colors[static_cast<std::size_t>(p.cls)] +
             "\" fill-opacity=\"0.8\"/>\n";
    }
    // Legend strip right of the plot.
    double lx = mleft + plot + 30.0;
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        double ly = mtop + 10.0 + 24.0 * static_cast<double>(c);
        s += "<rect x=\"" + svg_num(lx) + "\" y=\"" + svg_num(ly) +
             "\" width=\"14\" height=\"14\" fill=\"" + class_colors[c] + "\"/>\n";
        s += "<text x=\"" + svg_num(lx + 20.0) + "\" y=\"" + svg_num(ly + 12.0) +
             "\" font-family=\"sans-serif\" font-size=\"13\">" + xml_escape(class_names[c]) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

// Confusion heatmap: rows are gold classes, columns predictions, cell shade
// scales with count. Count text flips to white past half intensity.
inline std::string confusion_svg(const Confusion& cm, const std::vector<std::string>& class_names,
                                 const std::string& title = "") {
    using detail::svg_num;
    using detail::xml_escape;
    const int k = cm.num_classes();
    if (static_cast<int>(class_names.size()) != k)
        throw DataError("confusion_svg: class name count mismatch");

    double cell = std::clamp(440.0 / std::max(1, k), 28.0, 80.0);
    const double mleft = 120.0, mtop = 90.0;
    const double width = mleft + cell * k + 40.0;
    const double height = mtop + cell * k + 40.0;

    std::size_t maxc = 1;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) maxc = std::max(maxc, cm.count(i, j));

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) + "\" height=\"" +
         svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) + " " + svg_num(height) + "\">\n";
    s += "<rect width=\"" + svg_num(width) + "\" height=\"" + svg_num(height) + "\" fill=\"#ffffff\"/>\n";
    if (!title.empty())
        s += "<text x=\"" + svg_num(mleft + cell * k / 2) +
             "\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">" +
             xml_escape(title) + "</text>\n";
    s += "<text x=\"" + svg_num(mleft + cell * k / 2) +
         "\" y=\"52\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" fill=\"#555555\">predicted</text>\n";
    s += "<text x=\"16\" y=\"" + svg_num(mtop + cell * k / 2) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#555555\" transform=\"rotate(-90 16 " +
         svg_num(mtop + cell * k / 2) + ")\" text-anchor=\"middle\">gold</text>\n";

    for (int j = 0; j < k; ++j) {
        double cx = mleft + cell * j + cell / 2;
        s += "<text x=\"" + svg_num(cx) + "\" y=\"" + svg_num(mtop - 8.0) +
             "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
             xml_escape(class_names[static_cast<std::size_t>(j)]) + "</text>\n";
    }
    for (int i = 0; i < k; ++i) {
        double cy = mtop + cell * i + cell / 2;
        s += "<text x=\"" + svg_num(mleft - 8.0) + "\" y=\"" + svg_num(cy + 4.0) +
             "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
             xml_escape(class_names[static_cast<std::size_t>(i)]) + "</text>\n";
        for (int j = 0; j < k; ++j) {
            double t = static_cast<double>(cm.count(i, j)) / static_cast<double>(maxc);
            double x = mleft + cell * j, y = mtop + cell * i;
            s += "<rect x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" width=\"" + svg_num(cell) +
                 "\" height=\"" + svg_num(cell) + "\" fill=\"" + detail::heat_color(t) +
                 "\" stroke=\"#cccccc\"/>\n";
            s += "<text x=\"" + svg_num(x + cell / 2) + "\" y=\"" + svg_num(y + cell / 2 + 4.0) +
                 "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" fill=\"" +
                 (t > 0.5 ? "#ffffff" : "#222222") + "\">" + std::to_string(cm.count(i, j)) +
                 "</text>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

}  // namespace polemb
