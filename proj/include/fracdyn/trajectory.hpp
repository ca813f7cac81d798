#pragma once

#include "fracdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace fracdyn {

using State = std::vector<double>;

struct Sample {
    double t = 0.0;
    State state;
};

struct Trajectory {
    double alpha = 1.0;
    std::vector<Sample> samples;
    /// Human-readable description of what produced the samples.
    std::string source;
    bool uniform = false;
    /// Parameters where adaptive refinement hit min_dt with the turning angle
    /// still above the limit (speed near zero: cusp candidates).
    std::vector<double> stationary_params;

    [[nodiscard]] std::size_t size() const { return samples.size(); }
    [[nodiscard]] double t_front() const { return samples.front().t; }
    [[nodiscard]] double t_back() const { return samples.back().t; }
};

struct UniformSampling {
    int n = 1000;
};

struct AdaptiveSampling {
    double max_turn_angle = 0.05;
    double min_dt = 1e-7;
    int max_points = 200000;
    int initial_points = 512;
    /// Chords shorter than noise_rel * |x| are below evaluation noise and are not refined.
    double noise_rel = 1e-10;
    /// Initial grid t_start + span * u^grading; 2 crowds points toward t_start where ML solutions move fastest.
    double initial_grading = 2.0;
};

using SamplingPolicy = std::variant<UniformSampling, AdaptiveSampling>;

namespace detail {

/// Angle between chords p0->p1 and p1->p2; pi when either chord has zero length.
inline double turning_angle(const State& p0, const State& p1, const State& p2) {
    // Chords are rescaled first: exponentially growing solutions overflow n1 * n2.
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        s1 = std::max(s1, std::abs(p1[i] - p0[i]));
        s2 = std::max(s2, std::abs(p2[i] - p1[i]));
    }
    if (s1 == 0.0 || s2 == 0.0) return std::numbers::pi;
    double dot = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        const double a = (p1[i] - p0[i]) / s1;
        const double b = (p2[i] - p1[i]) / s2;
        dot += a * b;
        n1 += a * a;
        n2 += b * b;
    }
    return std::acos(std::clamp(dot / std::sqrt(n1 * n2), -1.0, 1.0));
}

inline bool below_noise(const State& p0, const State& p1, const State& p2, double noise_rel) {
    double n1 = 0.0;
    double n2 = 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        n1 = std::hypot(n1, p1[i] - p0[i]);
        n2 = std::hypot(n2, p2[i] - p1[i]);
        m = std::hypot(m, p1[i]);
    }
    const double floor = noise_rel * m;
    return n1 <= floor || n2 <= floor;
}

inline void check_finite(const State& s, double t) {
    for (double v : s) {
        require(std::isfinite(v), ErrorCode::RangeError, "non-finite state at t = " + std::to_string(t));
    }
}

}  // namespace detail

/// Samples `f` on [t_start, t_end]. Uniform: n equally spaced parameters.
/// Adaptive: starts from a grid that is uniform in sqrt(t - t_start) (dense
/// near the start, where fractional solutions move fastest) and bisects
/// intervals until every turning angle is below max_turn_angle.
[[nodiscard]] inline Trajectory sample_curve(const std::function<State(double)>& f, double t_start, double t_end,
                                             const SamplingPolicy& policy) {
    require(std::isfinite(t_start) && std::isfinite(t_end) && t_start < t_end, ErrorCode::DomainError,
            "need t_start < t_end");
    Trajectory traj;
    if (const auto* u = std::get_if<UniformSampling>(&policy)) {
        require(u->n >= 2, ErrorCode::DomainError, "uniform sampling needs n >= 2");
        traj.uniform = true;
        traj.samples.reserve(static_cast<std::size_t>(u->n));
        for (int i = 0; i < u->n; ++i) {
            const double t = i + 1 == u->n ? t_end : t_start + (t_end - t_start) * i / (u->n - 1);
            State s = f(t);
            detail::check_finite(s, t);
            traj.samples.push_back({t, std::move(s)});
        }
        return traj;
    }

    const auto& ad = std::get<AdaptiveSampling>(policy);
    require(ad.max_turn_angle > 0.0 && ad.min_dt > 0.0 && ad.initial_points >= 3 && ad.initial_grading >= 1.0 &&
                ad.max_points >= ad.initial_points,
            ErrorCode::DomainError, "invalid adaptive sampling policy");
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(ad.initial_points));
    const double span = t_end - t_start;
    for (int i = 0; i < ad.initial_points; ++i) {
        const double u = static_cast<double>(i) / (ad.initial_points - 1);
        ts.push_back(i + 1 == ad.initial_points ? t_end : t_start + span * std::pow(u, ad.initial_grading));
    }
    std::vector<State> xs;
    xs.reserve(ts.size());
    for (double t : ts) {
        xs.push_back(f(t));
        detail::check_finite(xs.back(), t);
    }

    std::vector<char> frozen(ts.size(), 0);  // interval [i, i+1] can no longer be split
    for (;;) {
        std::vector<char> split(ts.size(), 0);
        bool any = false;
        for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
            if (detail::turning_angle(xs[i - 1], xs[i], xs[i + 1]) <= ad.max_turn_angle) continue;
            if (detail::below_noise(xs[i - 1], xs[i], xs[i + 1], ad.noise_rel)) continue;
            for (std::size_t j : {i - 1, i}) {
                if (frozen[j]) continue;
                if (ts[j + 1] - ts[j] < 2.0 * ad.min_dt) {
                    frozen[j] = 1;
                    continue;
                }
                split[j] = 1;
                any = true;
            }
        }
        if (!any) break;
        std::vector<double> nts;
        std::vector<State> nxs;
        std::vector<char> nfrozen;
        const std::size_t extra = static_cast<std::size_t>(std::count(split.begin(), split.end(), 1));
        require(ts.size() + extra <= static_cast<std::size_t>(ad.max_points), ErrorCode::BudgetExceeded,
                "adaptive sampling needs more than " + std::to_string(ad.max_points) + " points");
        nts.reserve(ts.size() + extra);
        nxs.reserve(ts.size() + extra);
        nfrozen.reserve(ts.size() + extra);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            nts.push_back(ts[i]);
            nxs.push_back(std::move(xs[i]));
            nfrozen.push_back(frozen[i]);
            if (i + 1 < ts.size() && split[i]) {
                const double tm = 0.5 * (ts[i] + ts[i + 1]);
                State s = f(tm);
                detail::check_finite(s, tm);
                nts.push_back(tm);
                nxs.push_back(std::move(s));
                nfrozen.push_back(0);
            }
        }
        ts = std::move(nts);
        xs = std::move(nxs);
        frozen = std::move(nfrozen);
    }

    traj.samples.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        traj.samples.push_back({ts[i], std::move(xs[i])});
    }
    for (std::size_t i = 1; i + 1 < traj.samples.size(); ++i) {
        if ((frozen[i - 1] || frozen[i]) &&
            detail::turning_angle(traj.samples[i - 1].state, traj.samples[i].state, traj.samples[i + 1].state) >
                ad.max_turn_angle) {
            if (traj.stationary_params.empty() || traj.samples[i].t - traj.stationary_params.back() > 4.0 * ad.min_dt) {
                traj.stationary_params.push_back(traj.samples[i].t);
            }
        }
    }
    return traj;
}

}  // namespace fracdyn
