#pragma once

// Mittag-Leffler functions E_{a,b}(z) over the complex plane.
//
// Three evaluation routes, selected on w = |z|^(1/a), the modulus of the
// dominant pole s = z^(1/a) of the Laplace-domain kernel s^(a-b)/(s^a - z):
//
//   w <= series_radius        power series, summed in long double
//   series_radius < w < switch_radius
//                             residues + Hankel-type contour integral
//   w >= switch_radius        residues + algebraic asymptotic tail
//
// All routes can return a ScaledComplex (mantissa * exp(log_scale)) so that
// values beyond the double range can still be compared and have their
// phase inspected.

#include "fracdyn/error.hpp"
#include "fracdyn/mlf/gamma.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace fracdyn {

using Complex = std::complex<double>;

/// Default half-angle of the sector in which the exponential asymptotic
/// expansion is applied by ml_asymptotic.
[[nodiscard]] inline double default_sector(double alpha) {
    const double pi = std::numbers::pi;
    const double lo = alpha * pi / 2.0;
    const double hi = std::min(pi, alpha * pi);
    return lo + 0.1 * (hi - lo);
}

struct MLParams {
    double alpha = 0.5;
    double beta = 1.0;
    /// Term-magnitude stopping threshold of the power series, relative to 1 + |partial sum|.
    double series_tol = 1e-18;
    int max_terms = 50000;
    /// Upper bound on the truncation order p of the asymptotic tail; the tail
    /// is additionally cut at its smallest term.
    int asym_p = 400;
    /// Sector half-angle for ml_asymptotic; 0 selects default_sector(alpha).
    double mu = 0.0;
    /// Crossover to the asymptotic route, measured on |z|^(1/alpha).
    double switch_radius = 30.0;
    /// Crossover from the power series to the contour integral, measured on |z|^(1/alpha).
    double series_radius = 10.0;
    /// Relative tolerance of the contour quadrature.
    double quad_tol = 1e-13;
    int max_derivative = 8;

    [[nodiscard]] static MLParams with(double alpha, double beta = 1.0) {
        MLParams p;
        p.alpha = alpha;
        p.beta = beta;
        return p;
    }

    [[nodiscard]] double sector() const { return mu > 0.0 ? mu : default_sector(alpha); }

    void validate() const {
        require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 2.0, ErrorCode::DomainError,
                "alpha must lie in (0, 2], got " + std::to_string(alpha));
        require(std::isfinite(beta) && beta > 0.0, ErrorCode::DomainError,
                "beta must be positive, got " + std::to_string(beta));
        require(series_tol > 0.0 && max_terms > 0 && asym_p >= 1, ErrorCode::DomainError,
                "series_tol, max_terms and asym_p must be positive");
        require(series_radius > 0.0 && switch_radius > series_radius, ErrorCode::DomainError,
                "need 0 < series_radius < switch_radius");
        if (mu > 0.0 && alpha < 2.0) {
            const double pi = std::numbers::pi;
            require(mu > alpha * pi / 2.0 && mu < std::min(pi, alpha * pi), ErrorCode::DomainError,
                    "mu must lie strictly inside (alpha*pi/2, min(pi, alpha*pi))");
        }
    }
};

/// mantissa * exp(log_scale); log_scale >= 0.
struct ScaledComplex {
    Complex mantissa{0.0, 0.0};
    double log_scale = 0.0;

    [[nodiscard]] Complex value() const {
        if (log_scale == 0.0) return mantissa;
        const double m = std::abs(mantissa);
        if (m == 0.0) return {0.0, 0.0};
        const double log_mag = std::log(m) + log_scale;
        require(log_mag < std::log(std::numeric_limits<double>::max()), ErrorCode::RangeError,
                "Mittag-Leffler value exceeds the double range (log|E| = " + std::to_string(log_mag) + ")");
        return mantissa * std::exp(log_scale);
    }

    [[nodiscard]] double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

/// Relative distance |a - b| / |b| evaluated without leaving the scaled representation.
[[nodiscard]] inline double relative_difference(const ScaledComplex& a, const ScaledComplex& b) {
    const double m = std::max(a.log_scale, b.log_scale);
    const Complex av = a.mantissa * std::exp(a.log_scale - m);
    const Complex bv = b.mantissa * std::exp(b.log_scale - m);
    return std::abs(av - bv) / std::abs(bv);
}

namespace detail {

using LComplex = std::complex<long double>;

/// k-th derivative of the power series, sum_{n>=k} n!/(n-k)! z^(n-k) / Gamma(a n + b).
inline Complex ml_series(double alpha, double beta, Complex z, int k, double tol, int max_terms) {
    const long double a = alpha;
    const long double b = beta;
    const LComplex zl(z.real(), z.imag());
    const long double az = std::abs(zl);

    long double falling = 1.0L;  // n!/(n-k)! at n = k
    for (int i = 2; i <= k; ++i) falling *= i;

    LComplex sum(0.0L, 0.0L);
    LComplex zpow(1.0L, 0.0L);
    int small = 0;
    for (int n = k;; ++n) {
        if (n - k > max_terms) {
            throw Error(ErrorCode::NonConvergence,
                        "power series did not converge within " + std::to_string(max_terms) + " terms");
        }
        const long double x = a * n + b;
        const LComplex term = zpow * (falling * rgamma(x));
        sum += term;
        const long double mag = std::abs(term);
        // Terms are log-concave in n once a n + b > 2; past the peak a small term stays small.
        const bool past_peak =
            x > 2.0L && std::pow(x, a) > az * static_cast<long double>(n + 1) / static_cast<long double>(n + 1 - k);
        if (mag <= tol * (1.0L + std::abs(sum)) && past_peak) {
            if (++small >= 2) break;
        } else {
            small = 0;
        }
        zpow *= zl;
        falling = falling * static_cast<long double>(n + 1) / static_cast<long double>(n + 1 - k);
    }
    return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

[[nodiscard]] inline bool is_integer(double x) { return x == std::floor(x); }

struct PoleSet {
    std::array<Complex, 3> s{};
    int count = 0;
    double max_real = 0.0;
};

/// Poles of s^(a-b)/(s^a - z) on the principal sheet, |arg s| < limit.
inline PoleSet principal_poles(double alpha, double beta, Complex z, double limit) {
    const double pi = std::numbers::pi;
    const double phi = std::arg(z);
    const double rho = std::pow(std::abs(z), 1.0 / alpha);
    // With a = 1 and integer b the kernel has no branch cut, so a pole on the
    // negative axis is still a genuine residue.
    const bool cut_free = alpha == 1.0 && is_integer(beta);
    PoleSet poles;
    poles.max_real = -std::numeric_limits<double>::infinity();
    for (int j = -1; j <= 1; ++j) {
        const double angle = (phi + 2.0 * pi * j) / alpha;
        const bool inside = std::abs(angle) < limit || (cut_free && angle == pi && limit >= pi);
        if (!inside) continue;
        const Complex s = std::polar(rho, angle);
        poles.s[static_cast<std::size_t>(poles.count++)] = s;
        poles.max_real = std::max(poles.max_real, s.real());
    }
    return poles;
}

/// sum over poles of (1/a) s^(1-b) exp(s - shift).
inline Complex residue_sum(double alpha, double beta, const PoleSet& poles, double shift) {
    Complex total(0.0, 0.0);
    for (int i = 0; i < poles.count; ++i) {
        const Complex s = poles.s[static_cast<std::size_t>(i)];
        const double rho = std::abs(s);
        const double angle = std::arg(s);
        const double log_mag = (1.0 - beta) * std::log(rho) + s.real() - shift - std::log(alpha);
        const double phase = angle * (1.0 - beta) + s.imag();
        total += std::polar(std::exp(log_mag), phase);
    }
    return total;
}

/// -sum_{k=1}^{p} z^(-k) / Gamma(b - a k), truncated at the smallest term.
/// `reference` is the magnitude the tail is added to (for the stopping test).
inline Complex algebraic_tail(double alpha, double beta, Complex z, int p_max, double reference,
                              int* order_used = nullptr) {
    const double log_az = std::log(std::abs(z));
    const Complex zinv = 1.0 / z;
    if (alpha == 1.0 && is_integer(beta)) p_max = std::min(p_max, static_cast<int>(beta) - 1);

    Complex sum(0.0, 0.0);
    Complex zp(1.0, 0.0);
    double prev_envelope = std::numeric_limits<double>::infinity();
    int used = 0;
    for (int k = 1; k <= p_max; ++k) {
        zp *= zinv;
        const double x = beta - alpha * k;
        const double envelope = -k * log_az + log_abs_rgamma_bound(x);
        if (k > 2 && envelope > prev_envelope) break;
        sum -= zp * rgamma(x);
        used = k;
        prev_envelope = envelope;
        const double scale = std::max(std::abs(sum), reference);
        if (scale > 0.0 && std::exp(envelope) < 1e-17 * scale) break;
    }
    if (order_used) *order_used = used;
    return sum;
}

/// Residues of all principal poles plus the algebraic tail.
inline ScaledComplex ml_asymptotic_full(double alpha, double beta, Complex z, int p_max) {
    const PoleSet poles = principal_poles(alpha, beta, z, std::numbers::pi);
    const double shift = poles.count > 0 ? std::max(0.0, poles.max_real) : 0.0;
    const Complex residues = residue_sum(alpha, beta, poles, shift);
    const double ref = std::abs(residues) * std::exp(shift);
    const Complex tail = algebraic_tail(alpha, beta, z, p_max, std::isfinite(ref) ? ref : 0.0);
    return {residues + tail * std::exp(-shift), shift};
}

// Boost 1.74 declares integrate() non-const; one instance per thread.
inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule;
}

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
    thread_local boost::math::quadrature::exp_sinh<double> rule;
    return rule;
}

/// Residues inside the wedge |arg s| < psi plus the integral along the two
/// rays s = x exp(+-i psi). Valid for b < 1 + a; larger b is reduced by
/// E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z.
inline ScaledComplex ml_contour(double alpha, double beta, Complex z, double tol) {
    if (beta >= 1.0 + alpha) {
        const ScaledComplex lower = ml_contour(alpha, beta - alpha, z, tol);
        const Complex shifted_const = rgamma(beta - alpha) * std::exp(-lower.log_scale);
        return {(lower.mantissa - shifted_const) / z, lower.log_scale};
    }
    const double pi = std::numbers::pi;
    const PoleSet all = principal_poles(alpha, beta, z, pi);

    // Pick the ray angle that stays furthest from every pole direction.
    double psi = pi;
    double best = -1.0;
    for (double frac : {1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6}) {
        const double cand = frac * pi;
        double gap = pi;
        for (int i = 0; i < all.count; ++i) {
            gap = std::min(gap, std::abs(cand - std::abs(std::arg(all.s[static_cast<std::size_t>(i)]))));
        }
        if (gap > best + 1e-12) {
            best = gap;
            psi = cand;
        }
    }
    const PoleSet enclosed = principal_poles(alpha, beta, z, psi);
    const double shift = enclosed.count > 0 ? std::max(0.0, enclosed.max_real) : 0.0;
    const Complex residues = residue_sum(alpha, beta, enclosed, shift);

    const double cos_psi = std::cos(psi);
    const double sin_psi = std::sin(psi);
    const double am = alpha - beta;
    const auto integrand = [=](double x) -> Complex {
        if (x <= 0.0) return {0.0, 0.0};
        const double lx = std::log(x);
        const double decay = x * cos_psi;
        Complex acc(0.0, 0.0);
        for (int sign : {1, -1}) {
            const double ang = sign * psi;
            // exp(s) s^(a-b) / (s^a - z) * ds/dx
            const Complex num = std::polar(std::exp(decay + am * lx), sign * x * sin_psi + am * ang + ang);
            const Complex den = std::polar(std::exp(alpha * lx), alpha * ang) - z;
            acc += static_cast<double>(sign) * num / den;
        }
        return acc / Complex(0.0, 2.0 * pi);
    };
    // Break at the pole radius while the ray is still non-negligible there;
    // otherwise at one decay length of exp(x cos psi).
    const double pole_radius = std::pow(std::abs(z), 1.0 / alpha);
    const double split = pole_radius * std::abs(cos_psi) <= 200.0 ? pole_radius : 1.0 / std::abs(cos_psi);
    const Complex left = tanh_sinh_rule().integrate(integrand, 0.0, split, tol);
    const Complex right = exp_sinh_rule().integrate(
        [&](double u) { return integrand(split + u); }, 0.0, std::numeric_limits<double>::infinity(), tol);
    const Complex integral = left + right;
    require(std::isfinite(integral.real()) && std::isfinite(integral.imag()), ErrorCode::NonConvergence,
            "contour quadrature produced a non-finite value");
    return {residues + integral * std::exp(-shift), shift};
}

inline ScaledComplex canonical_conj(ScaledComplex v, bool flip) {
    if (flip) v.mantissa = std::conj(v.mantissa);
    return v;
}

inline double pole_modulus(double alpha, Complex z) { return std::pow(std::abs(z), 1.0 / alpha); }

/// E_{a,b}(z) for any real b (b <= 0 allowed; needed by derivative identities).
inline ScaledComplex ml_eval(double alpha, double beta, Complex z, const MLParams& p) {
    if (z == Complex(0.0, 0.0)) return {Complex(rgamma(beta), 0.0), 0.0};
    // Real series coefficients: evaluate in the closed upper half plane and reflect.
    const bool flip = z.imag() < 0.0;
    if (flip) z = std::conj(z);
    const double w = pole_modulus(alpha, z);
    if (w <= p.series_radius) {
        return canonical_conj({ml_series(alpha, beta, z, 0, p.series_tol, p.max_terms), 0.0}, flip);
    }
    if (w >= p.switch_radius) {
        require(alpha > 0.0 && alpha < 2.0, ErrorCode::DomainError,
                "asymptotic branch requires 0 < alpha < 2");
        return canonical_conj(ml_asymptotic_full(alpha, beta, z, p.asym_p), flip);
    }
    return canonical_conj(ml_contour(alpha, beta, z, p.quad_tol), flip);
}

/// Non-asymptotic route only (series or contour integral), for cross-checks.
inline ScaledComplex ml_eval_convergent(double alpha, double beta, Complex z, const MLParams& p) {
    if (z == Complex(0.0, 0.0)) return {Complex(rgamma(beta), 0.0), 0.0};
    const bool flip = z.imag() < 0.0;
    if (flip) z = std::conj(z);
    if (pole_modulus(alpha, z) <= p.series_radius) {
        return canonical_conj({ml_series(alpha, beta, z, 0, p.series_tol, p.max_terms), 0.0}, flip);
    }
    return canonical_conj(ml_contour(alpha, beta, z, p.quad_tol), flip);
}

/// Coefficients c_j with z^k f^(k)(z) = sum_j c_j E_{a,b-j}(z), from
/// (a z d/dz + b - 1) E_{a,b} = E_{a,b-1}.
inline std::vector<double> derivative_combination(double alpha, double beta, int k) {
    std::vector<double> c{1.0};
    for (int i = 0; i < k; ++i) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double bj = beta - static_cast<double>(j);
            next[j] += c[j] * (-(bj - 1.0) / alpha - static_cast<double>(i));
            next[j + 1] += c[j] / alpha;
        }
        c = std::move(next);
    }
    return c;
}

inline ScaledComplex ml_deriv_eval(double alpha, double beta, int k, Complex z, const MLParams& p) {
    if (k == 0) return ml_eval(alpha, beta, z, p);
    const bool flip = z.imag() < 0.0;
    if (flip) z = std::conj(z);
    if (z == Complex(0.0, 0.0) || pole_modulus(alpha, z) <= p.series_radius) {
        return canonical_conj({ml_series(alpha, beta, z, k, p.series_tol, p.max_terms), 0.0}, flip);
    }
    const std::vector<double> c = derivative_combination(alpha, beta, k);
    std::vector<ScaledComplex> parts;
    parts.reserve(c.size());
    double shift = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        parts.push_back(ml_eval(alpha, beta - static_cast<double>(j), z, p));
        shift = std::max(shift, parts.back().log_scale);
    }
    Complex acc(0.0, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
        acc += c[j] * parts[j].mantissa * std::exp(parts[j].log_scale - shift);
    }
    return canonical_conj({acc / std::pow(z, k), shift}, flip);
}

}  // namespace detail

/// Two-parameter Mittag-Leffler function, scaled representation.
[[nodiscard]] inline ScaledComplex ml2_scaled(const MLParams& params, Complex z) {
    params.validate();
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorCode::DomainError, "z must be finite");
    return detail::ml_eval(params.alpha, params.beta, z, params);
}

/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
[[nodiscard]] inline Complex ml2(const MLParams& params, Complex z) { return ml2_scaled(params, z).value(); }

/// E_alpha(z) = E_{alpha,1}(z); params.beta is ignored.
[[nodiscard]] inline Complex ml1(const MLParams& params, Complex z) {
    MLParams p = params;
    p.beta = 1.0;
    return ml2(p, z);
}

[[nodiscard]] inline ScaledComplex ml_deriv_scaled(const MLParams& params, int k, Complex z) {
    params.validate();
    require(k >= 0 && k <= params.max_derivative, ErrorCode::DomainError,
            "derivative order must lie in [0, " + std::to_string(params.max_derivative) + "]");
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorCode::DomainError, "z must be finite");
    return detail::ml_deriv_eval(params.alpha, params.beta, k, z, params);
}

/// k-th derivative d^k/dz^k E_{alpha,beta}(z).
[[nodiscard]] inline Complex ml_deriv(const MLParams& params, int k, Complex z) {
    return ml_deriv_scaled(params, k, z).value();
}

/// Convergent (non-asymptotic) evaluation: power series for small |z|^(1/alpha),
/// otherwise the contour-integral representation.
[[nodiscard]] inline ScaledComplex ml2_convergent_scaled(const MLParams& params, Complex z) {
    params.validate();
    return detail::ml_eval_convergent(params.alpha, params.beta, z, params);
}

struct AsymptoticTerms {
    ScaledComplex value;
    int order = 0;  ///< truncation order p actually used
};

/// Exponential asymptotic expansion for |arg z| <= mu:
///   (1/alpha) z^((1-beta)/alpha) exp(z^(1/alpha)) - sum_{k=1}^{p} z^(-k) / Gamma(beta - alpha k),
/// principal branch for z^(1/alpha); p <= asym_p, cut at the smallest term.
[[nodiscard]] inline AsymptoticTerms ml_asymptotic_terms(const MLParams& params, Complex z) {
    params.validate();
    const double alpha = params.alpha;
    const double beta = params.beta;
    require(alpha > 0.0 && alpha < 2.0, ErrorCode::DomainError, "asymptotic expansion requires 0 < alpha < 2");
    require(std::abs(z) > 0.0, ErrorCode::DomainError, "asymptotic expansion undefined at z = 0");
    const double mu = params.sector();
    require(std::abs(std::arg(z)) <= mu * (1.0 + 1e-12), ErrorCode::DomainError,
            "|arg z| = " + std::to_string(std::abs(std::arg(z))) + " exceeds the sector mu = " + std::to_string(mu));

    const double rho = std::pow(std::abs(z), 1.0 / alpha);
    const double angle = std::arg(z) / alpha;
    const Complex s = std::polar(rho, angle);
    const double shift = std::max(0.0, s.real());
    detail::PoleSet pole;
    pole.s[0] = s;
    pole.count = 1;
    const Complex lead = detail::residue_sum(alpha, beta, pole, shift);
    const double ref = std::abs(lead) * std::exp(shift);
    int order = 0;
    const Complex tail = detail::algebraic_tail(alpha, beta, z, params.asym_p, std::isfinite(ref) ? ref : 0.0, &order);
    return {{lead + tail * std::exp(-shift), shift}, order};
}

[[nodiscard]] inline ScaledComplex ml_asymptotic_scaled(const MLParams& params, Complex z) {
    return ml_asymptotic_terms(params, z).value;
}

[[nodiscard]] inline Complex ml_asymptotic(const MLParams& params, Complex z) {
    return ml_asymptotic_scaled(params, z).value();
}

}  // namespace fracdyn
