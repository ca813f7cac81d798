#pragma once

// Classical plane curves with known singular points; used as detector fixtures.

#include "fracdyn/error.hpp"
#include "fracdyn/singular.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fracdyn::curves {

/// (t^2, t^3 - 3t): double point at (3, 0) for t = -sqrt(3), sqrt(3).
[[nodiscard]] inline AnalyticCurve nodal_cubic(double t_min = -3.0, double t_max = 3.0) {
    return {[](double t) { return t * t; }, [](double t) { return t * t * t - 3.0 * t; },
            [](double t) { return 2.0 * t; }, [](double t) { return 3.0 * t * t - 3.0; }, t_min, t_max};
}

/// (sin t, sin 2t) on [-pi, pi]: crosses itself at the origin.
[[nodiscard]] inline AnalyticCurve figure_eight() {
    return {[](double t) { return std::sin(t); }, [](double t) { return std::sin(2.0 * t); },
            [](double t) { return std::cos(t); }, [](double t) { return 2.0 * std::cos(2.0 * t); }, -std::numbers::pi,
            std::numbers::pi};
}

/// (t^2, t^4): the parabola y = x^2 traversed twice; t = 0 is a reducible critical point.
[[nodiscard]] inline AnalyticCurve reducible_parabola(double t_min = -2.0, double t_max = 2.0) {
    return {[](double t) { return t * t; }, [](double t) { return t * t * t * t; },
            [](double t) { return 2.0 * t; }, [](double t) { return 4.0 * t * t * t; }, t_min, t_max};
}

/// (t^2, t^3): ordinary cusp at the origin.
[[nodiscard]] inline AnalyticCurve cuspidal_cubic(double t_min = -2.0, double t_max = 2.0) {
    return {[](double t) { return t * t; }, [](double t) { return t * t * t; }, [](double t) { return 2.0 * t; },
            [](double t) { return 3.0 * t * t; }, t_min, t_max};
}

[[nodiscard]] inline AnalyticCurve unit_circle() {
    return {[](double t) { return std::cos(t); }, [](double t) { return std::sin(t); },
            [](double t) { return -std::sin(t); }, [](double t) { return std::cos(t); }, 0.0, 2.0 * std::numbers::pi};
}

[[nodiscard]] inline std::vector<std::string> fixture_names() {
    return {"nodal-cubic", "figure-eight", "parabola", "cusp", "circle"};
}

[[nodiscard]] inline AnalyticCurve fixture(const std::string& name) {
    if (name == "nodal-cubic") return nodal_cubic();
    if (name == "figure-eight") return figure_eight();
    if (name == "parabola") return reducible_parabola();
    if (name == "cusp") return cuspidal_cubic();
    if (name == "circle") return unit_circle();
    throw Error(ErrorCode::UsageError, "unknown fixture '" + name + "'");
}

}  // namespace fracdyn::curves
