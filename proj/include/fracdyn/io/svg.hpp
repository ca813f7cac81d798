#pragma once

// Phase-portrait SVG: one <polyline> per trajectory, one marker element per singular point.

#include "fracdyn/io/format.hpp"
#include "fracdyn/singular.hpp"
#include "fracdyn/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace fracdyn::io {

struct SvgOptions {
    double width = 640.0;
    double height = 640.0;
    double margin = 0.05;  ///< fraction of the bounding box added on each side
    bool axes = true;
    std::string title;
};

[[nodiscard]] inline std::string portrait_svg(const std::vector<Trajectory>& trajs,
                                              const std::vector<SingularPoint>& points, const SvgOptions& opt = {}) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& tr : trajs) {
        for (const auto& s : tr.samples) {
            x0 = std::min(x0, s.state[0]);
            x1 = std::max(x1, s.state[0]);
            y0 = std::min(y0, s.state[1]);
            y1 = std::max(y1, s.state[1]);
        }
    }
    for (const auto& p : points) {
        x0 = std::min(x0, p.location[0]);
        x1 = std::max(x1, p.location[0]);
        y0 = std::min(y0, p.location[1]);
        y1 = std::max(y1, p.location[1]);
    }
    if (!(x0 <= x1)) x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    // Equal aspect: a square box around the data.
    const double cx = 0.5 * (x0 + x1);
    const double cy = 0.5 * (y0 + y1);
    double half = 0.5 * std::max(x1 - x0, y1 - y0);
    if (half == 0.0) half = 1.0;
    half *= 1.0 + 2.0 * opt.margin;
    const double s = std::min(opt.width, opt.height) / (2.0 * half);
    const auto px = [&](double x) { return opt.width / 2.0 + (x - cx) * s; };
    const auto py = [&](double y) { return opt.height / 2.0 - (y - cy) * s; };
    const auto X = [&](double x) { return fmt(px(x), 8); };
    const auto Y = [&](double y) { return fmt(py(y), 8); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt(opt.width) << ' ' << fmt(opt.height)
        << "\" width=\"" << fmt(opt.width) << "\" height=\"" << fmt(opt.height) << "\">\n";
    if (!opt.title.empty()) out << "<title>" << opt.title << "</title>\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (opt.axes) {
        if (cx - half <= 0.0 && 0.0 <= cx + half) {
            out << "<line class=\"axis\" x1=\"" << X(0.0) << "\" y1=\"0\" x2=\"" << X(0.0) << "\" y2=\""
                << fmt(opt.height) << "\" stroke=\"#bbb\" stroke-width=\"1\"/>\n";
        }
        if (cy - half <= 0.0 && 0.0 <= cy + half) {
            out << "<line class=\"axis\" x1=\"0\" y1=\"" << Y(0.0) << "\" x2=\"" << fmt(opt.width) << "\" y2=\""
                << Y(0.0) << "\" stroke=\"#bbb\" stroke-width=\"1\"/>\n";
        }
    }
    for (const auto& tr : trajs) {
        out << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < tr.samples.size(); ++i) {
            if (i) out << ' ';
            out << X(tr.samples[i].state[0]) << ',' << Y(tr.samples[i].state[1]);
        }
        out << "\"/>\n";
    }
    for (const auto& p : points) {
        if (p.kind == SingularKind::cusp) {
            out << "<rect class=\"marker cusp\" x=\"" << fmt(px(p.location[0]) - 4.0, 8) << "\" y=\""
                << fmt(py(p.location[1]) - 4.0, 8)
                << "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";
        } else {
            out << "<circle class=\"marker " << (p.kind == SingularKind::double_point ? "double" : "multiple")
                << "\" cx=\"" << X(p.location[0]) << "\" cy=\"" << Y(p.location[1])
                << "\" r=\"4\" fill=\"none\" stroke=\"#d35400\" stroke-width=\"1.5\"/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace fracdyn::io
