#pragma once

// Real polynomials in one variable: arithmetic, determinants of polynomial
// matrices, and all complex roots via the companion matrix.

#include "fracdyn/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace fracdyn {

/// Coefficients in increasing degree: c[0] + c[1] x + ...
using Poly = std::vector<double>;

namespace poly {

inline void trim(Poly& p) {
    while (p.size() > 1 && p.back() == 0.0) p.pop_back();
    if (p.empty()) p.push_back(0.0);
}

[[nodiscard]] inline int degree(const Poly& p) {
    for (std::size_t i = p.size(); i-- > 0;) {
        if (p[i] != 0.0) return static_cast<int>(i);
    }
    return -1;
}

[[nodiscard]] inline Poly add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    trim(r);
    return r;
}

[[nodiscard]] inline Poly scale(const Poly& a, double s) {
    Poly r = a;
    for (double& c : r) c *= s;
    trim(r);
    return r;
}

[[nodiscard]] inline Poly mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    trim(r);
    return r;
}

[[nodiscard]] inline std::complex<double> eval(const Poly& p, std::complex<double> x) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

/// sum |c_k| |x|^k, the natural scale for judging |p(x)|.
[[nodiscard]] inline double eval_abs(const Poly& p, double ax) {
    double acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * ax + std::abs(p[i]);
    return acc;
}

[[nodiscard]] inline Poly derivative(const Poly& p) {
    if (p.size() <= 1) return {0.0};
    Poly r(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = p[i] * static_cast<double>(i);
    return r;
}

/// Determinant of a square matrix with polynomial entries, by cofactor
/// expansion memoised over the set of columns still available.
[[nodiscard]] inline Poly determinant(const std::vector<std::vector<Poly>>& m) {
    const std::size_t n = m.size();
    require(n >= 1 && n <= 20, ErrorCode::DomainError, "polynomial matrix size must lie in [1, 20]");
    std::unordered_map<std::uint32_t, Poly> memo;
    const auto rec = [&](auto&& self, std::size_t row, std::uint32_t cols) -> Poly {
        if (row == n) return {1.0};
        if (auto it = memo.find(cols); it != memo.end()) return it->second;
        Poly acc{0.0};
        int sign = 1;
        for (std::size_t c = 0; c < n; ++c) {
            if (!(cols & (1u << c))) continue;
            const Poly& entry = m[row][c];
            if (degree(entry) >= 0) {
                const Poly minor = self(self, row + 1, cols & ~(1u << c));
                acc = add(acc, scale(mul(entry, minor), sign));
            }
            sign = -sign;
        }
        memo.emplace(cols, acc);
        return acc;
    };
    return rec(rec, 0, (n == 32 ? 0u : (1u << n)) - 1u);
}

/// All complex roots (with multiplicity), companion-matrix eigenvalues polished
/// by Newton steps on the polynomial itself.
[[nodiscard]] inline std::vector<std::complex<double>> roots(const Poly& p_in) {
    Poly p = p_in;
    trim(p);
    const int deg = degree(p);
    require(deg >= 1, ErrorCode::DomainError, "polynomial must have degree >= 1");
    std::vector<std::complex<double>> out;
    // Exact zero roots first; the companion matrix of the deflated polynomial is better conditioned.
    std::size_t shift = 0;
    while (p[shift] == 0.0) ++shift;
    for (std::size_t i = 0; i < shift; ++i) out.emplace_back(0.0, 0.0);
    Poly q(p.begin() + static_cast<std::ptrdiff_t>(shift), p.end());
    const int d = degree(q);
    if (d == 0) return out;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
    const double lead = q[static_cast<std::size_t>(d)];
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -q[static_cast<std::size_t>(i)] / lead;
    const Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    const Poly dq = derivative(q);
    for (int i = 0; i < d; ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        for (int it = 0; it < 8; ++it) {
            const std::complex<double> f = eval(q, z);
            const std::complex<double> df = eval(dq, z);
            if (std::abs(df) == 0.0) break;
            const std::complex<double> step = f / df;
            const std::complex<double> next = z - step;
            if (std::abs(eval(q, next)) >= std::abs(f)) break;
            z = next;
        }
        // Real polynomial: snap roots whose imaginary part is round-off.
        if (std::abs(z.imag()) <= 1e-14 * std::max(1.0, std::abs(z))) z = {z.real(), 0.0};
        out.push_back(z);
    }
    std::sort(out.begin(), out.end(), [](auto a, auto b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

}  // namespace poly
}  // namespace fracdyn
