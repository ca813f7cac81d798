#pragma once

// Singular points of planar parametric curves: cusps (vanishing velocity with
// a tangent reversal) and double/multiple points (self-intersections).

#include "fracdyn/error.hpp"
#include "fracdyn/mlf.hpp"
#include "fracdyn/trajectory.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace fracdyn {

using Point2 = std::array<double, 2>;

/// X(t) = conj(E_alpha(lambda t^alpha)) (C1 + i C2), lambda = r e^{i theta}: the
/// solution of the planar system with block [[a, b], [-b, a]] from x0 = (C1, C2).
struct MLCurve {
    double alpha = 0.5;
    double r = 1.0;
    double theta = 0.0;
    Point2 x0{1.0, 0.0};
};

struct SampledCurve {
    Trajectory traj;
};

struct AnalyticCurve {
    std::function<double(double)> x;
    std::function<double(double)> y;
    std::function<double(double)> dx;
    std::function<double(double)> dy;
    double t_min = 0.0;
    double t_max = 1.0;
};

using ParametricCurve = std::variant<MLCurve, SampledCurve, AnalyticCurve>;

enum class SingularKind { cusp, double_point, multiple_point };

[[nodiscard]] constexpr std::string_view to_string(SingularKind k) {
    switch (k) {
        case SingularKind::cusp: return "cusp";
        case SingularKind::double_point: return "double";
        case SingularKind::multiple_point: return "multiple";
    }
    return "unknown";
}

struct SingularPoint {
    SingularKind kind = SingularKind::double_point;
    Point2 location{0.0, 0.0};
    std::vector<double> parameters;
    std::optional<double> tangent_jump;
    std::optional<double> speed_min;
    bool reducible_flag = false;
};

namespace detail {

inline void validate_curve(const ParametricCurve& c) {
    if (const auto* m = std::get_if<MLCurve>(&c)) {
        require(std::isfinite(m->alpha) && m->alpha > 0.0 && m->alpha <= 1.0, ErrorCode::DomainError,
                "MLCurve alpha must lie in (0, 1]");
        require(std::isfinite(m->r) && m->r > 0.0, ErrorCode::DomainError, "MLCurve r must be positive");
        require(std::isfinite(m->theta), ErrorCode::DomainError, "MLCurve theta must be finite");
    } else if (const auto* s = std::get_if<SampledCurve>(&c)) {
        require(s->traj.samples.size() >= 2, ErrorCode::DomainError, "sampled curve needs at least two samples");
        require(s->traj.samples.front().state.size() == 2, ErrorCode::DomainError, "sampled curve must be planar");
    } else {
        const auto& a = std::get<AnalyticCurve>(c);
        require(a.x && a.y && a.dx && a.dy, ErrorCode::DomainError, "analytic curve needs all four handles");
        require(a.t_min < a.t_max, ErrorCode::DomainError, "analytic curve interval is empty");
    }
}

inline MLParams ml_params(const MLCurve& m, double beta) {
    MLParams p = MLParams::with(m.alpha, beta);
    return p;
}

inline Complex ml_position(const MLCurve& m, double t) {
    const Complex lambda = std::polar(m.r, m.theta);
    const Complex e = ml2(ml_params(m, 1.0), lambda * std::pow(t, m.alpha));
    return std::conj(e) * Complex(m.x0[0], m.x0[1]);
}

/// dX/dt = conj(lambda t^(alpha-1) E_{alpha,alpha}(lambda t^alpha)) (C1 + i C2).
inline Complex ml_velocity(const MLCurve& m, double t) {
    const Complex lambda = std::polar(m.r, m.theta);
    const Complex e = ml2(ml_params(m, m.alpha), lambda * std::pow(t, m.alpha));
    return std::conj(lambda * std::pow(t, m.alpha - 1.0) * e) * Complex(m.x0[0], m.x0[1]);
}

/// Index of the last sample with t <= s (clamped to a valid segment start).
inline std::size_t sample_segment(const Trajectory& tr, double t) {
    const auto it = std::upper_bound(tr.samples.begin(), tr.samples.end(), t,
                                     [](double v, const Sample& s) { return v < s.t; });
    std::size_t i = it == tr.samples.begin() ? 0 : static_cast<std::size_t>(it - tr.samples.begin()) - 1;
    return std::min(i, tr.samples.size() - 2);
}

}  // namespace detail

[[nodiscard]] inline Point2 curve_position(const ParametricCurve& c, double t) {
    if (const auto* m = std::get_if<MLCurve>(&c)) {
        const Complex p = detail::ml_position(*m, t);
        return {p.real(), p.imag()};
    }
    if (const auto* s = std::get_if<SampledCurve>(&c)) {
        const Trajectory& tr = s->traj;
        const std::size_t i = detail::sample_segment(tr, t);
        const Sample& a = tr.samples[i];
        const Sample& b = tr.samples[i + 1];
        const double u = (t - a.t) / (b.t - a.t);
        return {a.state[0] + u * (b.state[0] - a.state[0]), a.state[1] + u * (b.state[1] - a.state[1])};
    }
    const auto& a = std::get<AnalyticCurve>(c);
    return {a.x(t), a.y(t)};
}

[[nodiscard]] inline Point2 curve_velocity(const ParametricCurve& c, double t) {
    if (const auto* m = std::get_if<MLCurve>(&c)) {
        const Complex v = detail::ml_velocity(*m, t);
        return {v.real(), v.imag()};
    }
    if (const auto* s = std::get_if<SampledCurve>(&c)) {
        const Trajectory& tr = s->traj;
        const std::size_t i = detail::sample_segment(tr, t);
        const Sample& a = tr.samples[i];
        const Sample& b = tr.samples[i + 1];
        const double dt = b.t - a.t;
        return {(b.state[0] - a.state[0]) / dt, (b.state[1] - a.state[1]) / dt};
    }
    const auto& a = std::get<AnalyticCurve>(c);
    return {a.dx(t), a.dy(t)};
}

[[nodiscard]] inline double curve_speed(const ParametricCurve& c, double t) {
    const Point2 v = curve_velocity(c, t);
    return std::hypot(v[0], v[1]);
}

/// Parameter interval of curves that carry one; ML curves are defined on [0, inf).
[[nodiscard]] inline std::optional<std::pair<double, double>> curve_interval(const ParametricCurve& c) {
    if (std::holds_alternative<MLCurve>(c)) return std::nullopt;
    if (const auto* s = std::get_if<SampledCurve>(&c)) return std::pair{s->traj.t_front(), s->traj.t_back()};
    const auto& a = std::get<AnalyticCurve>(c);
    return std::pair{a.t_min, a.t_max};
}

[[nodiscard]] inline Trajectory sample_parametric(const ParametricCurve& c, double t_start, double t_end,
                                                  const SamplingPolicy& policy) {
    detail::validate_curve(c);
    if (const auto* s = std::get_if<SampledCurve>(&c)) {
        Trajectory out = s->traj;
        std::erase_if(out.samples, [&](const Sample& x) { return x.t < t_start || x.t > t_end; });
        return out;
    }
    SamplingPolicy pol = policy;
    if (std::holds_alternative<MLCurve>(c)) {
        require(t_start >= 0.0, ErrorCode::DomainError, "ML curves are defined for t >= 0");
    } else if (auto* ad = std::get_if<AdaptiveSampling>(&pol)) {
        ad->initial_grading = 1.0;
    }
    Trajectory tr = sample_curve(
        [&](double t) {
            const Point2 p = curve_position(c, t);
            return State{p[0], p[1]};
        },
        t_start, t_end, pol);
    if (const auto* m = std::get_if<MLCurve>(&c)) {
        tr.alpha = m->alpha;
        tr.source = "ML curve";
    } else {
        tr.source = "analytic curve";
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Tangent discontinuity

struct TangentJump {
    double angle = 0.0;
    /// Raw angle between the unit velocities, before any retrace correction.
    double raw_angle = 0.0;
    bool converged = false;
    /// The two sides of t0 trace the same arc: the velocity reversal is an
    /// artefact of the parametrization, not a corner of the curve.
    bool retraces = false;
    std::vector<double> sequence;
};

struct TangentJumpOptions {
    int levels = 4;          ///< probe_dt, probe_dt/2, ..., probe_dt/2^(levels-1)
    double tolerance = 1e-3;  ///< convergence tolerance on successive angles
    /// Relative distance below which the backward point is considered to lie on the forward arc.
    /// Brent locates the closest point only to ~sqrt(eps), hence the loose default.
    double retrace_tol = 1e-6;
};

[[nodiscard]] inline TangentJump tangent_jump(const ParametricCurve& c, double t0, double probe_dt,
                                              const TangentJumpOptions& opt = {}) {
    detail::validate_curve(c);
    require(probe_dt > 0.0 && std::isfinite(t0), ErrorCode::DomainError, "probe_dt must be positive");
    if (const auto iv = curve_interval(c)) {
        require(t0 - probe_dt >= iv->first && t0 + probe_dt <= iv->second, ErrorCode::DomainError,
                "t0 +- probe_dt must lie inside the curve interval");
    } else {
        require(t0 - probe_dt > 0.0, ErrorCode::DomainError, "t0 - probe_dt must be positive for ML curves");
    }

    const Point2 x0 = curve_position(c, t0);
    // Retrace test at the coarsest probe: distance from X(t0 - d) to the arc X(t0 + s), s in [0, 3d].
    {
        const Point2 back = curve_position(c, t0 - probe_dt);
        const double ref = std::hypot(back[0] - x0[0], back[1] - x0[1]);
        if (ref > 0.0) {
            const auto dist = [&](double s) {
                const Point2 p = curve_position(c, t0 + s);
                return std::hypot(p[0] - back[0], p[1] - back[1]);
            };
            const auto best = boost::math::tools::brent_find_minima(dist, 0.0, 3.0 * probe_dt, 52);
            // Refine from a coarse scan so that brent starts in the right basin.
            double smin = best.first;
            double dmin = best.second;
            for (int i = 0; i <= 60; ++i) {
                const double s = 3.0 * probe_dt * i / 60.0;
                const double d = dist(s);
                if (d < dmin) {
                    dmin = d;
                    smin = s;
                }
            }
            const double lo = std::max(0.0, smin - 0.05 * probe_dt);
            const double hi = std::min(3.0 * probe_dt, smin + 0.05 * probe_dt);
            dmin = std::min(dmin, boost::math::tools::brent_find_minima(dist, lo, hi, 52).second);
            if (dmin <= opt.retrace_tol * ref) {
                TangentJump out;
                out.retraces = true;
                out.converged = true;
                const Point2 vb = curve_velocity(c, t0 - probe_dt);
                const Point2 vf = curve_velocity(c, t0 + probe_dt);
                const double dot = vb[0] * vf[0] + vb[1] * vf[1];
                const double nb = std::hypot(vb[0], vb[1]);
                const double nf = std::hypot(vf[0], vf[1]);
                out.raw_angle = nb > 0.0 && nf > 0.0 ? std::acos(std::clamp(dot / (nb * nf), -1.0, 1.0)) : 0.0;
                out.angle = std::numbers::pi - out.raw_angle;
                out.sequence = {out.angle};
                return out;
            }
        }
    }

    TangentJump out;
    double d = probe_dt;
    int usable = 0;
    for (int k = 0; k < opt.levels; ++k, d *= 0.5) {
        const Point2 vb = curve_velocity(c, t0 - d);
        const Point2 vf = curve_velocity(c, t0 + d);
        const double nb = std::hypot(vb[0], vb[1]);
        const double nf = std::hypot(vf[0], vf[1]);
        const double floor = 1e-300;
        if (!(nb > floor) || !(nf > floor)) continue;
        ++usable;
        const double cosang = std::clamp((vb[0] * vf[0] + vb[1] * vf[1]) / (nb * nf), -1.0, 1.0);
        out.sequence.push_back(std::acos(cosang));
    }
    require(usable > 0, ErrorCode::DegenerateTangent, "speed vanishes on the whole probe sequence");
    out.angle = out.sequence.back();
    out.raw_angle = out.angle;
    out.converged = out.sequence.size() >= 2 &&
                    std::abs(out.sequence[out.sequence.size() - 1] - out.sequence[out.sequence.size() - 2]) <=
                        opt.tolerance;
    return out;
}

// ---------------------------------------------------------------------------
// Critical points (vanishing velocity)

struct CriticalPointOptions {
    /// Parameter window searched; defaults to the curve interval, or [0.5, 500] for ML curves.
    std::optional<std::pair<double, double>> t_range;
    /// ML curves: zeros z* of E_{alpha,alpha} are accepted when |arg z* - theta| <= arg_match_tol.
    double arg_match_tol = 1e-4;
    double zero_tol = 1e-10;
    /// Analytic/sampled curves: speed threshold as a fraction of the median sampled speed.
    double speed_tol_rel = 1e-3;
    int scan_points = 4000;
    /// Tangent probe step as a fraction of the local time scale; 0 selects 0.25 for ML
    /// curves (a quarter radian of the oscillation) and 1e-2 of the interval otherwise.
    double probe_rel = 0.0;
    SamplingPolicy sampling = AdaptiveSampling{};
};

struct CriticalPoint {
    double t0 = 0.0;
    double speed = 0.0;
    /// Speed threshold the point was tested against.
    double speed_tol = 0.0;
    TangentJump jump;
    bool reducible = false;
    /// ML curves: the zero of E_{alpha,alpha} and its angular offset from the ray.
    std::optional<MLZero> zero;
    std::optional<double> arg_offset;
};

namespace detail {

inline double default_probe(const ParametricCurve& c, double t0, double rel) {
    if (const auto* m = std::get_if<MLCurve>(&c)) {
        // Measured in radians of the oscillation exp(r^(1/alpha) e^{i theta/alpha} t). Near-cusps
        // (theta a little off a zero's argument) are smooth below this scale.
        const double omega = std::pow(m->r, 1.0 / m->alpha);
        return std::min((rel > 0.0 ? rel : 0.25) / omega, 0.25 * t0);
    }
    if (rel <= 0.0) rel = 1e-2;
    const auto iv = curve_interval(c);
    const double span = iv ? iv->second - iv->first : 1.0;
    double d = rel * span;
    if (iv) d = std::min({d, 0.5 * (t0 - iv->first), 0.5 * (iv->second - t0)});
    return d;
}

/// Local minima of |X'| on the parameter grid, each polished by Brent.
inline std::vector<std::pair<double, double>> speed_minima(const ParametricCurve& c, const std::vector<double>& ts) {
    std::vector<double> sp(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) sp[i] = curve_speed(c, ts[i]);
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
        if (!(sp[i] <= sp[i - 1] && sp[i] < sp[i + 1])) continue;
        const auto best =
            boost::math::tools::brent_find_minima([&](double t) { return curve_speed(c, t); }, ts[i - 1], ts[i + 1], 60);
        out.emplace_back(best.first, best.second);
    }
    // A minimum exactly at an interior grid point with equal neighbours is caught above;
    // ends of the grid are not critical points.
    return out;
}

}  // namespace detail

[[nodiscard]] inline std::vector<CriticalPoint> critical_points(const ParametricCurve& c,
                                                                const CriticalPointOptions& opt = {}) {
    detail::validate_curve(c);
    std::pair<double, double> range;
    if (opt.t_range) {
        range = *opt.t_range;
    } else if (const auto iv = curve_interval(c)) {
        range = *iv;
    } else {
        range = {0.5, 500.0};
    }
    require(range.first < range.second, ErrorCode::DomainError, "critical-point search range is empty");

    std::vector<CriticalPoint> out;
    if (const auto* m = std::get_if<MLCurve>(&c)) {
        require(range.first > 0.0, ErrorCode::DomainError, "ML curves are searched on t > 0");
        const Trajectory tr = sample_parametric(c, range.first, range.second, opt.sampling);
        std::vector<double> ts;
        ts.reserve(tr.samples.size());
        for (const Sample& s : tr.samples) ts.push_back(s.t);
        MLParams pk = MLParams::with(m->alpha, m->alpha);
        for (const auto& [tc, speed] : detail::speed_minima(c, ts)) {
            // Zeros near the ray point z_c = lambda t_c^alpha; a box of half-width
            // a few times |z_c| * arg_match_tol holds every zero that could match.
            const Complex zc = std::polar(m->r * std::pow(tc, m->alpha), m->theta);
            const double h = 3.0 * std::abs(zc) * opt.arg_match_tol + 1e-12;
            const Rect box{zc.real() - h, zc.real() + h, zc.imag() - h, zc.imag() + h};
            std::vector<MLZero> zs;
            try {
                zs = ml_zeros(pk, box, opt.zero_tol);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ContourThroughZero) throw;
                // A zero sitting on the box edge: retry with a slightly larger box.
                const double h2 = 1.37 * h;
                zs = ml_zeros(pk, {zc.real() - h2, zc.real() + h2, zc.imag() - h2, zc.imag() + h2}, opt.zero_tol);
            }
            for (const MLZero& z : zs) {
                double off = z.argument - m->theta;
                off = std::remainder(off, 2.0 * std::numbers::pi);
                if (std::abs(off) > opt.arg_match_tol) continue;
                const double t0 = std::pow(z.modulus / m->r, 1.0 / m->alpha);
                if (t0 < range.first || t0 > range.second) continue;
                CriticalPoint cp;
                cp.t0 = t0;
                cp.speed = curve_speed(c, t0);
                // Off the ray by an angle d, |X'| ~ r t^(alpha-1) |z* E'_{alpha,alpha}(z*)| |x0| d.
                const Complex dE = ml_deriv(pk, 1, z.z);
                cp.speed_tol = 2.0 * opt.arg_match_tol * m->r * std::pow(t0, m->alpha - 1.0) * z.modulus *
                               std::abs(dE) * std::hypot(m->x0[0], m->x0[1]);
                cp.zero = z;
                cp.arg_offset = off;
                const double d = detail::default_probe(c, t0, opt.probe_rel);
                cp.jump = tangent_jump(c, t0, d);
                cp.reducible = cp.jump.retraces;
                out.push_back(cp);
            }
        }
    } else {
        std::vector<double> ts(static_cast<std::size_t>(opt.scan_points));
        for (int i = 0; i < opt.scan_points; ++i) {
            ts[static_cast<std::size_t>(i)] = range.first + (range.second - range.first) * i / (opt.scan_points - 1);
        }
        std::vector<double> sp;
        sp.reserve(ts.size());
        for (double t : ts) sp.push_back(curve_speed(c, t));
        std::vector<double> sorted = sp;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
        const double tol = opt.speed_tol_rel * sorted[sorted.size() / 2];
        for (const auto& [tc, speed] : detail::speed_minima(c, ts)) {
            if (!(speed < tol)) continue;
            CriticalPoint cp;
            cp.t0 = tc;
            cp.speed = speed;
            cp.speed_tol = tol;
            const double d = detail::default_probe(c, tc, opt.probe_rel);
            if (d > 0.0) {
                cp.jump = tangent_jump(c, tc, d);
                cp.reducible = cp.jump.retraces;
            }
            out.push_back(cp);
        }
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) { return a.t0 < b.t0; });
    return out;
}

// ---------------------------------------------------------------------------
// Self-intersections

struct IntersectionOptions {
    /// Crossings closer than this are one singular point; <= 0 selects 1e-6 * bounding-box diagonal.
    double merge_radius = 0.0;
    /// Parameters closer than this are the same visit; <= 0 selects 1e-3 * (t_end - t_start).
    double param_separation = 0.0;
    /// Target |X(t1) - X(t2)| for refinement on the exact curve.
    double refine_tol = 1e-9;
    /// Minimum |sin| of the angle between the two branches; retraced arcs (reducible
    /// parametrizations) touch without crossing and are rejected.
    double min_crossing_sin = 1e-4;
    /// Stop after this many accepted crossings (0 = no limit). Existence checks use 1.
    std::size_t hit_limit = 0;
};

namespace detail {

struct Hit {
    double t1;
    double t2;
    Point2 p;
};

/// Intersection of segments [a, b] and [c, d] including touching endpoints.
inline std::optional<std::pair<double, double>> segment_hit(const Point2& a, const Point2& b, const Point2& c,
                                                            const Point2& d) {
    const double rx = b[0] - a[0], ry = b[1] - a[1];
    const double sx = d[0] - c[0], sy = d[1] - c[1];
    const double den = rx * sy - ry * sx;
    const double scale = std::hypot(rx, ry) * std::hypot(sx, sy);
    if (scale == 0.0 || std::abs(den) <= 1e-14 * scale) return std::nullopt;  // parallel or degenerate
    const double qx = c[0] - a[0], qy = c[1] - a[1];
    const double u = (qx * sy - qy * sx) / den;
    const double v = (qx * ry - qy * rx) / den;
    constexpr double eps = 1e-12;
    if (u < -eps || u > 1.0 + eps || v < -eps || v > 1.0 + eps) return std::nullopt;
    return std::pair{std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
}

/// Newton on X(t1) - X(t2) = 0.
inline bool refine_crossing(const ParametricCurve& c, double& t1, double& t2, double tol, double lo, double hi) {
    for (int it = 0; it < 40; ++it) {
        const Point2 p1 = curve_position(c, t1);
        const Point2 p2 = curve_position(c, t2);
        const double fx = p1[0] - p2[0];
        const double fy = p1[1] - p2[1];
        if (std::hypot(fx, fy) <= tol) return true;
        const Point2 v1 = curve_velocity(c, t1);
        const Point2 v2 = curve_velocity(c, t2);
        // J = [v1, -v2]
        const double det = v1[0] * (-v2[1]) - (-v2[0]) * v1[1];
        if (det == 0.0 || !std::isfinite(det)) return false;
        const double d1 = (fx * (-v2[1]) - (-v2[0]) * fy) / det;
        const double d2 = (v1[0] * fy - v1[1] * fx) / det;
        t1 -= d1;
        t2 -= d2;
        if (!(t1 >= lo && t1 <= hi && t2 >= lo && t2 <= hi)) return false;
    }
    const Point2 p1 = curve_position(c, t1);
    const Point2 p2 = curve_position(c, t2);
    return std::hypot(p1[0] - p2[0], p1[1] - p2[1]) <= tol;
}

}  // namespace detail

/// Transverse crossings of the sampled polyline (adjacent segments excluded),
/// refined on `exact` when given, merged into double/multiple points.
[[nodiscard]] inline std::vector<SingularPoint> self_intersections(const Trajectory& traj,
                                                                   const IntersectionOptions& opt = {},
                                                                   const ParametricCurve* exact = nullptr) {
    const auto& S = traj.samples;
    require(S.size() >= 4, ErrorCode::DomainError, "self-intersection search needs at least four samples");
    require(S.front().state.size() == 2, ErrorCode::DomainError, "self-intersection search needs a planar trajectory");
    const std::size_t nseg = S.size() - 1;

    double xmin = S[0].state[0], xmax = xmin, ymin = S[0].state[1], ymax = ymin;
    for (std::size_t i = 0; i < S.size(); ++i) {
        xmin = std::min(xmin, S[i].state[0]);
        xmax = std::max(xmax, S[i].state[0]);
        ymin = std::min(ymin, S[i].state[1]);
        ymax = std::max(ymax, S[i].state[1]);
    }
    const double diag = std::hypot(xmax - xmin, ymax - ymin);
    const double merge_radius = opt.merge_radius > 0.0 ? opt.merge_radius : 1e-6 * diag;
    const double t_span = S.back().t - S.front().t;
    const double param_sep = opt.param_separation > 0.0 ? opt.param_separation : 1e-3 * t_span;
    if (diag == 0.0) return {};

    const Point2 first{S.front().state[0], S.front().state[1]};
    const Point2 last{S.back().state[0], S.back().state[1]};
    // A closed traversal: the two ends are one point of the curve.
    const bool closed = std::hypot(first[0] - last[0], first[1] - last[1]) <= merge_radius;

    // Bounding-box hierarchy over runs of consecutive segments; node pairs with
    // disjoint boxes are pruned, which keeps spirals and long smooth arcs cheap.
    struct Node {
        double x0, x1, y0, y1;
        std::uint32_t lo, hi;  // segment range [lo, hi)
        std::int32_t left = -1, right = -1;
    };
    std::vector<Node> nodes;
    nodes.reserve(2 * nseg / 4 + 2);
    constexpr std::uint32_t leaf_size = 8;
    const auto build = [&](auto&& self, std::uint32_t lo, std::uint32_t hi) -> std::int32_t {
        Node n{S[lo].state[0], S[lo].state[0], S[lo].state[1], S[lo].state[1], lo, hi};
        for (std::uint32_t k = lo; k <= hi; ++k) {
            n.x0 = std::min(n.x0, S[k].state[0]);
            n.x1 = std::max(n.x1, S[k].state[0]);
            n.y0 = std::min(n.y0, S[k].state[1]);
            n.y1 = std::max(n.y1, S[k].state[1]);
        }
        const auto id = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(n);
        if (hi - lo > leaf_size) {
            const std::uint32_t m = lo + (hi - lo) / 2;
            const std::int32_t l = self(self, lo, m);
            const std::int32_t r = self(self, m, hi);
            nodes[static_cast<std::size_t>(id)].left = l;
            nodes[static_cast<std::size_t>(id)].right = r;
        }
        return id;
    };
    build(build, 0, static_cast<std::uint32_t>(nseg));
    const double pad = 1e-12 * diag;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    const auto consider = [&](std::uint32_t i, std::uint32_t j) {
        if (i > j) std::swap(i, j);
        if (j <= i + 1) return;
        if (closed && i == 0 && j + 1 == nseg) return;
        pairs.emplace_back(i, j);
    };
    const auto visit = [&](auto&& self, std::int32_t ia, std::int32_t ib) -> void {
        const Node& A = nodes[static_cast<std::size_t>(ia)];
        const Node& B = nodes[static_cast<std::size_t>(ib)];
        if (A.x1 + pad < B.x0 || B.x1 + pad < A.x0 || A.y1 + pad < B.y0 || B.y1 + pad < A.y0) return;
        const bool leafA = A.left < 0;
        const bool leafB = B.left < 0;
        if (ia == ib) {
            if (leafA) {
                for (std::uint32_t i = A.lo; i < A.hi; ++i) {
                    for (std::uint32_t j = i + 2; j < A.hi; ++j) consider(i, j);
                }
            } else {
                self(self, A.left, A.left);
                self(self, A.right, A.right);
                self(self, A.left, A.right);
            }
            return;
        }
        if (leafA && leafB) {
            for (std::uint32_t i = A.lo; i < A.hi; ++i) {
                for (std::uint32_t j = B.lo; j < B.hi; ++j) consider(i, j);
            }
            return;
        }
        if (leafB || (!leafA && A.hi - A.lo >= B.hi - B.lo)) {
            self(self, A.left, ib);
            self(self, A.right, ib);
        } else {
            self(self, ia, B.left);
            self(self, ia, B.right);
        }
    };
    visit(visit, 0, 0);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    const auto pt = [&](std::size_t i) { return Point2{S[i].state[0], S[i].state[1]}; };
    std::vector<detail::Hit> hits;
    for (const auto& [i, j] : pairs) {
        const auto h = detail::segment_hit(pt(i), pt(i + 1), pt(j), pt(j + 1));
        if (!h) continue;
        double t1 = S[i].t + h->first * (S[i + 1].t - S[i].t);
        double t2 = S[j].t + h->second * (S[j + 1].t - S[j].t);
        Point2 p{S[i].state[0] + h->first * (S[i + 1].state[0] - S[i].state[0]),
                 S[i].state[1] + h->first * (S[i + 1].state[1] - S[i].state[1])};
        if (exact) {
            double r1 = t1;
            double r2 = t2;
            if (detail::refine_crossing(*exact, r1, r2, opt.refine_tol * std::max(1.0, diag), S.front().t, S.back().t) &&
                std::abs(r1 - t1) <= 4.0 * (S[i + 1].t - S[i].t + S[j + 1].t - S[j].t) &&
                std::abs(r2 - t2) <= 4.0 * (S[i + 1].t - S[i].t + S[j + 1].t - S[j].t)) {
                t1 = r1;
                t2 = r2;
                const Point2 q1 = curve_position(*exact, t1);
                const Point2 q2 = curve_position(*exact, t2);
                p = {0.5 * (q1[0] + q2[0]), 0.5 * (q1[1] + q2[1])};
            }
        }
        if (std::abs(t2 - t1) <= param_sep) continue;
        if (closed && std::abs(std::abs(t2 - t1) - t_span) <= param_sep) continue;
        {
            Point2 v1;
            Point2 v2;
            if (exact) {
                v1 = curve_velocity(*exact, t1);
                v2 = curve_velocity(*exact, t2);
            } else {
                // Chords spanning the neighbouring samples, so vertex touches see both sides.
                const auto chord = [&](std::size_t k) {
                    const std::size_t lo = k == 0 ? 0 : k - 1;
                    const std::size_t hi = std::min(k + 2, S.size() - 1);
                    return Point2{S[hi].state[0] - S[lo].state[0], S[hi].state[1] - S[lo].state[1]};
                };
                v1 = chord(i);
                v2 = chord(j);
            }
            const double n1 = std::hypot(v1[0], v1[1]);
            const double n2 = std::hypot(v2[0], v2[1]);
            if (n1 > 0.0 && n2 > 0.0 &&
                std::abs(v1[0] * v2[1] - v1[1] * v2[0]) / (n1 * n2) < opt.min_crossing_sin) {
                continue;
            }
        }
        hits.push_back({t1, t2, p});
        if (opt.hit_limit > 0 && hits.size() >= opt.hit_limit) break;
    }

    // Group hits by location: each hit joins the first earlier group whose seed lies within
    // merge_radius, found through a hash of merge_radius-sized cells.
    std::vector<std::vector<std::size_t>> groups;
    std::vector<Point2> centers;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> seeds;
    const auto key = [](std::int64_t ix, std::int64_t iy) { return ix * 73856093LL ^ iy * 19349663LL; };
    for (std::size_t h = 0; h < hits.size(); ++h) {
        const auto ix = static_cast<std::int64_t>(std::floor(hits[h].p[0] / merge_radius));
        const auto iy = static_cast<std::int64_t>(std::floor(hits[h].p[1] / merge_radius));
        std::size_t best = groups.size();
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto it = seeds.find(key(ix + dx, iy + dy));
                if (it == seeds.end()) continue;
                for (std::size_t g : it->second) {
                    if (g < best && std::hypot(hits[h].p[0] - centers[g][0], hits[h].p[1] - centers[g][1]) <= merge_radius) {
                        best = g;
                    }
                }
            }
        }
        if (best < groups.size()) {
            groups[best].push_back(h);
        } else {
            seeds[key(ix, iy)].push_back(groups.size());
            groups.push_back({h});
            centers.push_back(hits[h].p);
        }
    }

    std::vector<SingularPoint> out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<double> ps;
        Point2 acc{0.0, 0.0};
        for (std::size_t h : groups[g]) {
            ps.push_back(hits[h].t1);
            ps.push_back(hits[h].t2);
            acc[0] += hits[h].p[0];
            acc[1] += hits[h].p[1];
        }
        if (closed) {
            // The final parameter is the same visit as the first one.
            for (double& t : ps) {
                if (std::abs(t - S.back().t) <= param_sep) t = S.front().t;
            }
        }
        std::sort(ps.begin(), ps.end());
        std::vector<double> distinct;
        for (double t : ps) {
            if (distinct.empty() || t - distinct.back() > param_sep) distinct.push_back(t);
        }
        if (distinct.size() < 2) continue;
        SingularPoint sp;
        sp.kind = distinct.size() == 2 ? SingularKind::double_point : SingularKind::multiple_point;
        const double n = static_cast<double>(groups[g].size());
        sp.location = {acc[0] / n, acc[1] / n};
        sp.parameters = std::move(distinct);
        out.push_back(std::move(sp));
    }
    std::sort(out.begin(), out.end(),
              [](const SingularPoint& a, const SingularPoint& b) { return a.parameters.front() < b.parameters.front(); });
    return out;
}

// ---------------------------------------------------------------------------
// Combined detection

struct DetectionConfig {
    SamplingPolicy sampling = AdaptiveSampling{};
    IntersectionOptions intersections;
    CriticalPointOptions critical;
    double cusp_angle_threshold = std::numbers::pi / 2.0;
    bool find_cusps = true;
    bool find_intersections = true;
    /// Existence mode: stop at the first singular point found (crossings are searched first).
    bool stop_at_first = false;
};

struct DetectionReport {
    std::vector<SingularPoint> points;
    std::vector<CriticalPoint> critical;
    Trajectory trajectory;
};

[[nodiscard]] inline DetectionReport detect_singularities_report(const ParametricCurve& c, double t_start, double t_end,
                                                                 const DetectionConfig& cfg = {}) {
    detail::validate_curve(c);
    DetectionReport rep;
    rep.trajectory = sample_parametric(c, t_start, t_end, cfg.sampling);
    if (cfg.find_intersections && rep.trajectory.samples.size() >= 4) {
        const bool refinable = !std::holds_alternative<SampledCurve>(c);
        IntersectionOptions iopt = cfg.intersections;
        if (cfg.stop_at_first) iopt.hit_limit = 1;
        rep.points = self_intersections(rep.trajectory, iopt, refinable ? &c : nullptr);
    }
    if (cfg.find_cusps && !(cfg.stop_at_first && !rep.points.empty())) {
        CriticalPointOptions copt = cfg.critical;
        copt.t_range = std::pair{t_start, t_end};
        copt.sampling = cfg.sampling;
        rep.critical = critical_points(c, copt);
        for (const CriticalPoint& cp : rep.critical) {
            if (cp.reducible || !(cp.jump.angle > cfg.cusp_angle_threshold)) continue;
            SingularPoint sp;
            sp.kind = SingularKind::cusp;
            sp.location = curve_position(c, cp.t0);
            sp.parameters = {cp.t0};
            sp.tangent_jump = cp.jump.angle;
            sp.speed_min = cp.speed;
            rep.points.push_back(sp);
        }
    }
    std::sort(rep.points.begin(), rep.points.end(), [](const SingularPoint& a, const SingularPoint& b) {
        return a.parameters.front() < b.parameters.front();
    });
    return rep;
}

[[nodiscard]] inline std::vector<SingularPoint> detect_singularities(const ParametricCurve& c, double t_start,
                                                                     double t_end, const DetectionConfig& cfg = {}) {
    return detect_singularities_report(c, t_start, t_end, cfg).points;
}

// ---------------------------------------------------------------------------
// Limit circle

struct LimitCircleReport {
    double predicted_radius = 0.0;
    double sampled_radius = 0.0;
    double relative_error = 0.0;
    std::pair<double, double> window;
};

/// Trajectory from eigenvalues r e^{+-i alpha pi/2}; the sampled radius is the
/// mean |X(t)| over the window, which averages out the decaying oscillation
/// about the limit circle.
[[nodiscard]] inline LimitCircleReport limit_circle(double alpha, double r, Point2 x0, std::pair<double, double> window,
                                                    int samples = 2001) {
    require(window.first > 0.0 && window.first < window.second, ErrorCode::DomainError, "invalid t window");
    require(samples >= 2, ErrorCode::DomainError, "need at least two samples");
    const ParametricCurve c = MLCurve{alpha, r, alpha * std::numbers::pi / 2.0, x0};
    detail::validate_curve(c);
    LimitCircleReport rep;
    rep.window = window;
    rep.predicted_radius = std::hypot(x0[0], x0[1]) / alpha;
    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = window.first + (window.second - window.first) * i / (samples - 1);
        const Point2 p = curve_position(c, t);
        sum += std::hypot(p[0], p[1]);
    }
    rep.sampled_radius = sum / samples;
    rep.relative_error = std::abs(rep.sampled_radius - rep.predicted_radius) / rep.predicted_radius;
    return rep;
}

}  // namespace fracdyn
