#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <string>

#include "morl/errors.hpp"
#include "morl/metrics.hpp"

namespace morl::io {

// Standalone scatter plot of a 2-D solution set plus the reference point.
// Output is plain deterministic SVG text: same inputs, same bytes.
inline void write_scatter_svg(const std::string& path, const metrics::PointSet& points,
                              const Eigen::VectorXd& reference) {
    if (points.empty()) throw ArgumentError("plot: empty solution set");
    for (const auto& p : points)
        if (p.size() != 2) throw ArgumentError("plot: only 2-D solution sets are supported");
    if (reference.size() != 2) throw ArgumentError("plot: reference point must be 2-D");

    double xmin = reference(0), xmax = reference(0);
    double ymin = reference(1), ymax = reference(1);
    for (const auto& p : points) {
        xmin = std::min(xmin, p(0));
        xmax = std::max(xmax, p(0));
        ymin = std::min(ymin, p(1));
        ymax = std::max(ymax, p(1));
    }
    const double xpad = (xmax - xmin) * 0.08 + 1e-12;
    const double ypad = (ymax - ymin) * 0.08 + 1e-12;
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    const double width = 640.0, height = 480.0, margin = 48.0;
    const auto sx = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    const auto sy = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    std::ofstream os(path);
    if (!os) throw IoError("plot: cannot open '" + path + "' for writing");
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << int(width) << "\" height=\""
       << int(height) << "\" viewBox=\"0 0 " << int(width) << ' ' << int(height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
       << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
       << height - margin << "\" stroke=\"black\"/>\n";
    os << "<rect class=\"reference\" x=\"" << sx(reference(0)) - 4 << "\" y=\""
       << sy(reference(1)) - 4 << "\" width=\"8\" height=\"8\" fill=\"crimson\"/>\n";
    for (const auto& p : points)
        os << "<circle class=\"solution\" cx=\"" << sx(p(0)) << "\" cy=\"" << sy(p(1))
           << "\" r=\"4\" fill=\"steelblue\"/>\n";
    os << "</svg>\n";
    if (!os) throw IoError("plot: write failed for '" + path + "'");
}

} // namespace morl::io
