#pragma once

// Reciprocal gamma with exact zeros at the poles of Gamma.
//
// Backed by the C library tgamma/lgamma; the reflection formula is applied
// by hand for negative arguments so that 1/Gamma stays finite where Gamma
// itself underflows.

#include <cmath>
#include <numbers>

namespace fracdyn::detail {

// glibc's lgamma writes the global signgam; the _r variants do not.
inline double lgamma_abs(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

inline long double lgamma_abs(long double x) {
    int sign = 0;
    return ::lgammal_r(x, &sign);
}

template <class Real>
[[nodiscard]] bool is_nonpositive_integer(Real x) {
    return x <= 0 && x == std::floor(x);
}

/// sin(pi x) with argument reduction done before the multiplication by pi.
template <class Real>
[[nodiscard]] Real sin_pi(Real x) {
    Real r = std::fmod(x, Real(2));
    if (r > 1) r -= 2;
    if (r < -1) r += 2;
    if (r == 0 || r == 1 || r == -1) return Real(0);
    return std::sin(std::numbers::pi_v<Real> * r);
}

/// 1/Gamma(x), exactly 0 for x in {0, -1, -2, ...}.
template <class Real>
[[nodiscard]] Real rgamma(Real x) {
    if (is_nonpositive_integer(x)) return Real(0);
    if (x > Real(0.5)) {
        const Real g = std::tgamma(x);
        if (std::isinf(g)) return Real(0);
        return Real(1) / g;
    }
    // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    const Real one_minus = Real(1) - x;
    const Real s = sin_pi(x);
    const Real g = std::tgamma(one_minus);
    if (std::isinf(g)) {
        return s * std::exp(lgamma_abs(one_minus)) / std::numbers::pi_v<Real>;
    }
    return s * g / std::numbers::pi_v<Real>;
}

/// log|Gamma(x)| upper envelope used to bound asymptotic series terms:
/// for x <= 0 returns log(Gamma(1-x)/pi), which bounds log|1/Gamma(x)|.
template <class Real>
[[nodiscard]] Real log_abs_rgamma_bound(Real x) {
    if (x > Real(0.5)) return -lgamma_abs(x);
    return lgamma_abs(Real(1) - x) - std::log(std::numbers::pi_v<Real>);
}

}  // namespace fracdyn::detail
