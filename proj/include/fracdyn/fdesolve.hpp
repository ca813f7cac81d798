#pragma once

// Fractional Adams predictor-corrector for Caputo systems D^{alpha_i} x_i = f_i(t, x),
// alpha_i in (0, 1], written in Volterra form and advanced on a uniform grid.

#include "fracdyn/error.hpp"
#include "fracdyn/mlf/gamma.hpp"
#include "fracdyn/trajectory.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace fracdyn {

using VectorField = std::function<State(double, const State&)>;

struct FDESystemSpec {
    std::vector<double> orders;
    VectorField field;
    State x0;
    double h = 1e-2;
    double t_end = 1.0;
    int corrector_iters = 2;
    /// Number of past steps kept in the memory sums; 0 keeps the full history.
    std::size_t memory_steps = 0;
    double blowup_bound = 1e8;

    void validate() const {
        require(!x0.empty(), ErrorCode::DomainError, "x0 must be non-empty");
        require(orders.size() == x0.size(), ErrorCode::DomainError, "orders and x0 must have the same length");
        for (double a : orders) {
            require(std::isfinite(a) && a > 0.0 && a <= 1.0, ErrorCode::DomainError,
                    "every order must lie in (0, 1]");
        }
        for (double v : x0) require(std::isfinite(v), ErrorCode::DomainError, "x0 must be finite");
        require(static_cast<bool>(field), ErrorCode::DomainError, "field is empty");
        require(std::isfinite(h) && h > 0.0 && std::isfinite(t_end) && t_end > 0.0 && h <= t_end,
                ErrorCode::InvalidStep, "need 0 < h <= t_end");
        require(corrector_iters >= 1, ErrorCode::DomainError, "corrector_iters must be >= 1");
        require(blowup_bound > 0.0, ErrorCode::DomainError, "blowup_bound must be positive");
    }
};

namespace detail {

struct PCWeights {
    double alpha = 1.0;
    double pred_scale = 0.0;  ///< h^alpha / Gamma(alpha + 1)
    double corr_scale = 0.0;  ///< h^alpha / Gamma(alpha + 2)
    std::vector<double> b;    ///< b[k] = (k+1)^alpha - k^alpha
    std::vector<double> a;    ///< a[k] = (k+2)^(alpha+1) + k^(alpha+1) - 2 (k+1)^(alpha+1)
    std::vector<double> pw1;  ///< pw1[k] = k^(alpha+1)
    std::vector<double> pw;   ///< pw[k] = k^alpha
};

inline PCWeights make_weights(double alpha, double h, std::size_t steps) {
    PCWeights w;
    w.alpha = alpha;
    w.pred_scale = std::pow(h, alpha) * rgamma(alpha + 1.0);
    w.corr_scale = std::pow(h, alpha) * rgamma(alpha + 2.0);
    w.pw.resize(steps + 3);
    w.pw1.resize(steps + 3);
    for (std::size_t k = 0; k < steps + 3; ++k) {
        const double kk = static_cast<double>(k);
        w.pw[k] = std::pow(kk, alpha);
        w.pw1[k] = std::pow(kk, alpha + 1.0);
    }
    w.b.resize(steps + 1);
    w.a.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        w.b[k] = w.pw[k + 1] - w.pw[k];
        w.a[k] = w.pw1[k + 2] + w.pw1[k] - 2.0 * w.pw1[k + 1];
    }
    return w;
}

}  // namespace detail

/// Diethelm-Ford-Freed scheme: product-rectangle predictor, product-trapezoid
/// corrector applied corrector_iters times, per-component order. Full-history memory
/// unless memory_steps > 0.
[[nodiscard]] inline Trajectory solve_pc(const FDESystemSpec& spec) {
    spec.validate();
    const std::size_t dim = spec.x0.size();
    const auto steps = static_cast<std::size_t>(std::llround(spec.t_end / spec.h));
    require(steps >= 1, ErrorCode::InvalidStep, "t_end / h must be at least 1");

    std::vector<detail::PCWeights> weights;
    std::vector<std::size_t> wi(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::size_t k = 0;
        while (k < weights.size() && weights[k].alpha != spec.orders[i]) ++k;
        if (k == weights.size()) weights.push_back(detail::make_weights(spec.orders[i], spec.h, steps));
        wi[i] = k;
    }

    const auto eval_field = [&](double t, const State& x) {
        State f = spec.field(t, x);
        require(f.size() == dim, ErrorCode::DomainError, "field returned a vector of the wrong dimension");
        return f;
    };

    std::vector<State> F;  // F[j] = f(t_j, x_j)
    F.reserve(steps + 1);
    Trajectory traj;
    traj.uniform = true;
    traj.source = "predictor-corrector";
    traj.alpha = spec.orders.front();
    traj.samples.reserve(steps + 1);
    traj.samples.push_back({0.0, spec.x0});
    F.push_back(eval_field(0.0, spec.x0));

    State pred(dim);
    State hist(dim);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t1 = static_cast<double>(n + 1) * spec.h;
        const std::size_t j0 = spec.memory_steps > 0 && n + 1 > spec.memory_steps ? n + 1 - spec.memory_steps : 0;
        for (std::size_t i = 0; i < dim; ++i) {
            const auto& w = weights[wi[i]];
            double sp = 0.0;
            double sc = 0.0;
            for (std::size_t j = j0; j <= n; ++j) {
                const double fj = F[j][i];
                sp += w.b[n - j] * fj;
                if (j == 0) {
                    const double nn = static_cast<double>(n);
                    sc += (w.pw1[n] - (nn - w.alpha) * w.pw[n + 1]) * fj;
                } else {
                    sc += w.a[n - j] * fj;
                }
            }
            pred[i] = spec.x0[i] + w.pred_scale * sp;
            hist[i] = spec.x0[i] + w.corr_scale * sc;
        }
        State x = pred;
        for (int it = 0; it < spec.corrector_iters; ++it) {
            const State fp = eval_field(t1, x);
            for (std::size_t i = 0; i < dim; ++i) x[i] = hist[i] + weights[wi[i]].corr_scale * fp[i];
        }
        double norm = 0.0;
        for (double v : x) norm = std::isfinite(v) ? std::max(norm, std::abs(v)) : INFINITY;
        if (!(norm <= spec.blowup_bound)) {
            throw Error(ErrorCode::Blowup, "solution norm exceeded " + std::to_string(spec.blowup_bound) +
                                               " at t = " + std::to_string(t1));
        }
        F.push_back(eval_field(t1, x));
        traj.samples.push_back({t1, std::move(x)});
    }
    return traj;
}

/// x' = x^2 - y, y' = x: planar quadratic system whose trajectories cross themselves
/// for orders a little below 1.
[[nodiscard]] inline VectorField quadratic_field() {
    return [](double, const State& x) { return State{x[0] * x[0] - x[1], x[0]}; };
}

}  // namespace fracdyn
