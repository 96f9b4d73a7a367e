#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "ransomguard/metrics.hpp"

namespace ransomguard {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline const char* fold_palette(std::size_t i) {
    static const char* colors[] = {"#8dd3c7", "#bebada", "#fb8072", "#80b1d3",
                                   "#fdb462", "#b3de69", "#fccde5", "#d9d9d9",
                                   "#bc80bd", "#ccebc5"};
    return colors[i % 10];
}

} // namespace detail

// 800x600 plot: thin per-fold curves, thick mean curve, chance diagonal,
// AUC legend
inline std::string render_roc_svg(const std::vector<roc_curve_result>& folds,
                                  const roc_curve_result& mean_curve,
                                  const std::string& title) {
    const double width = 800, height = 600;
    const double ml = 70, mr = 210, mt = 50, mb = 60;
    const double pw = width - ml - mr, ph = height - mt - mb;

    auto px = [&](double fpr) { return ml + fpr * pw; };
    auto py = [&](double tpr) { return mt + (1.0 - tpr) * ph; };
    auto polyline = [&](const roc_curve_result& c, const std::string& color,
                        double stroke_width, double opacity) {
        std::string s = "  <polyline fill=\"none\" stroke=\"" + color +
                        "\" stroke-width=\"" + detail::svg_num(stroke_width) +
                        "\" stroke-opacity=\"" + detail::svg_num(opacity) +
                        "\" points=\"";
        for (const roc_point& p : c.points) {
            s += detail::svg_num(px(p.fpr));
            s += ',';
            s += detail::svg_num(py(p.tpr));
            s += ' ';
        }
        s += "\"/>\n";
        return s;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    svg += "  <rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    svg += "  <text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"30\" "
           "font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">" +
           title + "</text>\n";

    // gridlines and axis ticks at 0.0 .. 1.0 by 0.2
    for (int i = 0; i <= 5; ++i) {
        double v = i / 5.0;
        std::string label = detail::svg_num(v).substr(0, 3);
        svg += "  <line x1=\"" + detail::svg_num(px(v)) + "\" y1=\"" +
               detail::svg_num(py(0)) + "\" x2=\"" + detail::svg_num(px(v)) +
               "\" y2=\"" + detail::svg_num(py(1)) +
               "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
        svg += "  <line x1=\"" + detail::svg_num(px(0)) + "\" y1=\"" +
               detail::svg_num(py(v)) + "\" x2=\"" + detail::svg_num(px(1)) +
               "\" y2=\"" + detail::svg_num(py(v)) +
               "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
        svg += "  <text x=\"" + detail::svg_num(px(v)) + "\" y=\"" +
               detail::svg_num(py(0) + 20) +
               "\" font-family=\"sans-serif\" font-size=\"12\" "
               "text-anchor=\"middle\">" + label + "</text>\n";
        svg += "  <text x=\"" + detail::svg_num(px(0) - 10) + "\" y=\"" +
               detail::svg_num(py(v) + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\" "
               "text-anchor=\"end\">" + label + "</text>\n";
    }

    svg += "  <rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) +
           "\" width=\"" + detail::svg_num(pw) + "\" height=\"" + detail::svg_num(ph) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    svg += "  <line x1=\"" + detail::svg_num(px(0)) + "\" y1=\"" +
           detail::svg_num(py(0)) + "\" x2=\"" + detail::svg_num(px(1)) + "\" y2=\"" +
           detail::svg_num(py(1)) +
           "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";

    for (std::size_t i = 0; i < folds.size(); ++i)
        svg += polyline(folds[i], detail::fold_palette(i), 1.0, 0.9);
    svg += polyline(mean_curve, "#1f3b99", 3.0, 1.0);

    svg += "  <text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" +
           detail::svg_num(height - 15) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
           "False positive rate</text>\n";
    svg += "  <text x=\"20\" y=\"" + detail::svg_num(mt + ph / 2) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 " + detail::svg_num(mt + ph / 2) + ")\">"
           "True positive rate</text>\n";

    // legend with per-fold and mean auc
    double lx = width - mr + 15, ly = mt + 10;
    svg += "  <text x=\"" + detail::svg_num(lx) + "\" y=\"" + detail::svg_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\" font-weight=\"bold\">"
           "AUC</text>\n";
    ly += 18;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        svg += "  <line x1=\"" + detail::svg_num(lx) + "\" y1=\"" +
               detail::svg_num(ly - 4) + "\" x2=\"" + detail::svg_num(lx + 24) +
               "\" y2=\"" + detail::svg_num(ly - 4) + "\" stroke=\"" +
               detail::fold_palette(i) + "\" stroke-width=\"2\"/>\n";
        svg += "  <text x=\"" + detail::svg_num(lx + 30) + "\" y=\"" +
               detail::svg_num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">fold " +
               std::to_string(i) + ": " + detail::svg_num(folds[i].auc) + "</text>\n";
        ly += 16;
    }
    svg += "  <line x1=\"" + detail::svg_num(lx) + "\" y1=\"" +
           detail::svg_num(ly - 4) + "\" x2=\"" + detail::svg_num(lx + 24) +
           "\" y2=\"" + detail::svg_num(ly - 4) +
           "\" stroke=\"#1f3b99\" stroke-width=\"3\"/>\n";
    svg += "  <text x=\"" + detail::svg_num(lx + 30) + "\" y=\"" + detail::svg_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\" font-weight=\"bold\">mean: " +
           detail::svg_num(mean_curve.auc) + "</text>\n";

    svg += "</svg>\n";
    return svg;
}

} // namespace ransomguard
