#pragma once

// Numerical estimate of the band of eigenvalue arguments around alpha*pi/2 in
// which trajectories of the planar system carry singular points.

#include "fracdyn/error.hpp"
#include "fracdyn/singular.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fracdyn {

struct RegionDetection {
    double t_start = 0.5;
    double t_max = 500.0;
    Point2 x0{1.0, 0.0};
    DetectionConfig singularity = [] {
        DetectionConfig c;
        AdaptiveSampling ad;
        ad.max_points = 200000;
        c.sampling = ad;
        return c;
    }();
};

struct ProbeRecord {
    double theta = 0.0;
    bool singular = false;
    std::string phase;  ///< "boundary", "scan-low", "bisect-high", ...
};

struct RegionIIEstimate {
    double alpha = 0.0;
    double r = 1.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double theta_low = 0.0;
    double theta_high = 0.0;
    RegionDetection detection;
    double bisection_tol = 1e-4;
    double bisection_tol_low = 1e-5;
    std::vector<ProbeRecord> log;
};

[[nodiscard]] inline std::vector<SingularPoint> region_probe(double alpha, double r, double theta,
                                                             const RegionDetection& det) {
    require(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0, ErrorCode::DomainError,
            "alpha must lie in (0, 1)");
    require(std::isfinite(r) && r > 0.0, ErrorCode::DomainError, "r must be positive");
    require(std::isfinite(theta) && theta >= 0.0 && theta <= std::numbers::pi, ErrorCode::DomainError,
            "theta must lie in [0, pi]");
    const ParametricCurve c = MLCurve{alpha, r, theta, det.x0};
    return detect_singularities(c, det.t_start, det.t_max, det.singularity);
}

[[nodiscard]] inline bool has_singular_trajectory(double alpha, double r, double theta,
                                                  const RegionDetection& det = {}) {
    RegionDetection d = det;
    d.singularity.stop_at_first = true;
    return !region_probe(alpha, r, theta, d).empty();
}

struct EstimateOptions {
    double bisection_tol = 1e-4;
    /// delta1 is O(1e-3), so the lower edge is resolved more finely.
    double bisection_tol_low = 1e-5;
    /// Outward scan steps from alpha*pi/2.
    double scan_step_high = 0.02;
    double scan_step_low = 5e-4;
    /// The band has holes (alpha = 0.9 has two above alpha*pi/2), so a scan only ends
    /// after this much consecutive non-singular angle.
    double gap_width_high = 0.3;
    double gap_width_low = 0.005;
};

/// Scans outward from alpha*pi/2 on each side, steps through gaps in the band,
/// and bisects the outermost singular/non-singular transition seen.
[[nodiscard]] inline RegionIIEstimate estimate_deltas(double alpha, double r, const RegionDetection& det = {},
                                                      const EstimateOptions& opt = {}) {
    require(opt.bisection_tol > 0.0 && opt.bisection_tol_low > 0.0, ErrorCode::DomainError,
            "bisection tolerances must be positive");
    require(opt.scan_step_high > 0.0 && opt.scan_step_low > 0.0 && opt.gap_width_high >= opt.scan_step_high &&
                opt.gap_width_low >= opt.scan_step_low,
            ErrorCode::DomainError, "scan steps must be positive and no wider than the gap widths");
    RegionIIEstimate est;
    est.alpha = alpha;
    est.r = r;
    est.detection = det;
    est.bisection_tol = opt.bisection_tol;
    est.bisection_tol_low = opt.bisection_tol_low;
    const double mid = alpha * std::numbers::pi / 2.0;

    const auto probe = [&](double theta, const char* phase) {
        const bool hit = has_singular_trajectory(alpha, r, theta, det);
        est.log.push_back({theta, hit, phase});
        return hit;
    };

    if (!probe(mid, "boundary")) {
        throw Error(ErrorCode::NoSingularityAtBoundary,
                    "no singular points at theta = alpha*pi/2; raise t_max or refine sampling");
    }

    // sign = +1 walks into the stable sector (delta2), -1 into the unstable one (delta1).
    const auto edge = [&](int sign, double step, double gap, double tol, const char* scan, const char* bisect) {
        double inside = 0.0;
        double outside = -1.0;
        const double limit = sign > 0 ? std::numbers::pi - mid : mid;
        for (int k = 1;; ++k) {
            const double d = k * step;
            if (d > limit) break;
            if (probe(mid + sign * d, scan)) {
                inside = d;
                outside = -1.0;
            } else {
                if (outside < 0.0) outside = d;
                if (d - inside >= gap) break;
            }
        }
        if (outside < 0.0) {
            throw Error(ErrorCode::BracketFailure, std::string("no non-singular angle found scanning ") +
                                                       (sign > 0 ? "above" : "below") + " alpha*pi/2");
        }
        while (outside - inside > tol) {
            const double d = 0.5 * (inside + outside);
            if (probe(mid + sign * d, bisect)) {
                inside = d;
            } else {
                outside = d;
            }
        }
        return 0.5 * (inside + outside);
    };

    est.delta2 = edge(+1, opt.scan_step_high, opt.gap_width_high, opt.bisection_tol, "scan-high", "bisect-high");
    est.delta1 = edge(-1, opt.scan_step_low, opt.gap_width_low, opt.bisection_tol_low, "scan-low", "bisect-low");
    est.theta_low = mid - est.delta1;
    est.theta_high = mid + est.delta2;
    return est;
}

}  // namespace fracdyn
