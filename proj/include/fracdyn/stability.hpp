#pragma once

// Stability of  D^alpha X = A X  from the eigenvalue arguments, the
// Region I/II/III assignment, planar portrait names, the incommensurate-order
// characteristic-polynomial test, and an empirical decay-exponent fit.

#include "fracdyn/error.hpp"
#include "fracdyn/linsys.hpp"
#include "fracdyn/polynomial.hpp"
#include "fracdyn/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fracdyn {

enum class Sector { I, III };
enum class Stability { unstable, critical, asymptotically_stable };
enum class Portrait { source, saddle, spiral_source, sink_node, spiral_sink, boundary_orbit, degenerate };
enum class DerivativeKind { caputo, riemann_liouville };
enum class Verdict { unstable, stable, asymptotically_stable };

[[nodiscard]] constexpr std::string_view to_string(Sector s) { return s == Sector::I ? "I" : "III"; }

[[nodiscard]] constexpr std::string_view to_string(Stability s) {
    switch (s) {
        case Stability::unstable: return "unstable";
        case Stability::critical: return "critical";
        case Stability::asymptotically_stable: return "asymptotically_stable";
    }
    return "unknown";
}

[[nodiscard]] constexpr std::string_view to_string(Portrait p) {
    switch (p) {
        case Portrait::source: return "source";
        case Portrait::saddle: return "saddle";
        case Portrait::spiral_source: return "spiral_source";
        case Portrait::sink_node: return "sink_node";
        case Portrait::spiral_sink: return "spiral_sink";
        case Portrait::boundary_orbit: return "boundary_orbit";
        case Portrait::degenerate: return "degenerate";
    }
    return "unknown";
}

[[nodiscard]] constexpr std::string_view to_string(DerivativeKind k) {
    return k == DerivativeKind::caputo ? "caputo" : "riemann_liouville";
}

[[nodiscard]] constexpr std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::unstable: return "unstable";
        case Verdict::stable: return "stable";
        case Verdict::asymptotically_stable: return "asymptotically_stable";
    }
    return "unknown";
}

struct RegionDeltas {
    double delta1 = 0.0;
    double delta2 = 0.0;
};

/// Published (alpha, delta1, delta2) reference rows.
inline constexpr std::array<std::array<double, 3>, 9> kRegionIITable{{
    {0.1, 0.0014, 0.0639204},
    {0.2, 0.0027, 0.127841},
    {0.3, 0.0039, 0.195761},
    {0.4, 0.0050, 0.264681},
    {0.5, 0.0057, 0.341602},
    {0.6, 0.0059, 0.422522},
    {0.7, 0.0058, 0.520443},
    {0.8, 0.0049, 0.633363},
    {0.9, 0.0031, 0.796283},
}};

/// Deltas linearly interpolated from the reference rows; below 0.1 the line
/// runs to (0, 0), above 0.9 the last row is held.
[[nodiscard]] inline RegionDeltas default_deltas(double alpha) {
    const auto& t = kRegionIITable;
    if (alpha <= t.front()[0]) {
        const double s = std::max(alpha, 0.0) / t.front()[0];
        return {s * t.front()[1], s * t.front()[2]};
    }
    if (alpha >= t.back()[0]) return {t.back()[1], t.back()[2]};
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (alpha <= t[i + 1][0]) {
            const double w = (alpha - t[i][0]) / (t[i + 1][0] - t[i][0]);
            return {t[i][1] + w * (t[i + 1][1] - t[i][1]), t[i][2] + w * (t[i + 1][2] - t[i][2])};
        }
    }
    return {t.back()[1], t.back()[2]};
}

struct ClassifyOptions {
    std::optional<RegionDeltas> deltas;  ///< default_deltas(alpha) when empty
    DerivativeKind kind = DerivativeKind::caputo;
    double angle_tol = 1e-9;
};

struct EigenClassification {
    Complex eigenvalue;
    double arg_abs = 0.0;
    double boundary_angle = 0.0;
    /// Stability sector: I (|arg| < boundary) or III (|arg| >= boundary).
    Sector region = Sector::I;
    /// Region II is a band straddling the boundary, so it overlaps I and III.
    bool in_region_ii = false;
    RegionDeltas deltas;
    Stability stability = Stability::unstable;
    Portrait portrait = Portrait::degenerate;
    DerivativeKind derivative_kind = DerivativeKind::caputo;
    /// Power-law exponent of the decay of stable modes: -alpha (Caputo) or -1-alpha (Riemann-Liouville).
    double decay_exponent = 0.0;
};

[[nodiscard]] inline EigenClassification classify_eigenvalue(double alpha, Complex lambda,
                                                             const ClassifyOptions& opt = {}) {
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0, ErrorCode::DomainError,
            "alpha must lie in (0, 1], got " + std::to_string(alpha));
    require(std::isfinite(lambda.real()) && std::isfinite(lambda.imag()), ErrorCode::DomainError,
            "eigenvalue must be finite");
    EigenClassification c;
    c.eigenvalue = lambda;
    c.boundary_angle = alpha * std::numbers::pi / 2.0;
    c.deltas = opt.deltas.value_or(default_deltas(alpha));
    c.derivative_kind = opt.kind;
    c.decay_exponent = opt.kind == DerivativeKind::caputo ? -alpha : -1.0 - alpha;
    if (lambda == Complex(0.0, 0.0)) {
        // Zero eigenvalue: constant mode, marginal and without a defined argument.
        c.arg_abs = 0.0;
        c.region = Sector::I;
        c.stability = Stability::critical;
        c.portrait = Portrait::degenerate;
        return c;
    }
    c.arg_abs = std::abs(std::arg(lambda));
    const double gap = c.arg_abs - c.boundary_angle;
    if (std::abs(gap) <= opt.angle_tol) {
        c.stability = Stability::critical;
        c.region = Sector::III;
    } else if (gap > 0.0) {
        c.stability = Stability::asymptotically_stable;
        c.region = Sector::III;
    } else {
        c.stability = Stability::unstable;
        c.region = Sector::I;
    }
    c.in_region_ii = c.arg_abs > c.boundary_angle - c.deltas.delta1 && c.arg_abs < c.boundary_angle + c.deltas.delta2;
    const bool real = lambda.imag() == 0.0;
    if (c.stability == Stability::critical) {
        c.portrait = Portrait::boundary_orbit;
    } else if (real) {
        c.portrait = lambda.real() > 0.0 ? Portrait::source : Portrait::sink_node;
    } else {
        c.portrait = c.stability == Stability::unstable ? Portrait::spiral_source : Portrait::spiral_sink;
    }
    return c;
}

struct SystemClassification {
    std::vector<EigenClassification> eigenvalues;
    Verdict verdict = Verdict::unstable;
    /// Phase-portrait name for planar systems.
    std::optional<Portrait> portrait;
    /// For two distinct negative real eigenvalues: the one of smaller magnitude
    /// (slow direction) and the one of larger magnitude.
    std::optional<double> weaker_eigenvalue;
    std::optional<double> stronger_eigenvalue;
};

[[nodiscard]] inline SystemClassification classify_system(const FractionalLinearSystem& sys,
                                                          const ClassifyOptions& opt = {}) {
    sys.validate();
    SystemClassification out;
    bool all_asymptotic = true;
    bool critical_defective = false;
    bool any_unstable = false;
    std::vector<double> real_eigs;
    for (const auto& blk : sys.blocks) {
        if (const auto* re = std::get_if<RealEigen>(&blk)) {
            out.eigenvalues.push_back(classify_eigenvalue(sys.alpha, Complex(re->lambda, 0.0), opt));
            real_eigs.push_back(re->lambda);
        } else if (const auto* jb = std::get_if<JordanBlock>(&blk)) {
            const EigenClassification c = classify_eigenvalue(sys.alpha, Complex(jb->lambda, 0.0), opt);
            for (int i = 0; i < jb->size; ++i) {
                out.eigenvalues.push_back(c);
                real_eigs.push_back(jb->lambda);
            }
            // Geometric multiplicity one inside a block of size >= 2.
            if (c.stability == Stability::critical) critical_defective = true;
        } else {
            const auto& cp = std::get<ComplexPair>(blk);
            out.eigenvalues.push_back(classify_eigenvalue(sys.alpha, Complex(cp.a, cp.b), opt));
            out.eigenvalues.push_back(classify_eigenvalue(sys.alpha, Complex(cp.a, -cp.b), opt));
        }
    }
    for (const auto& c : out.eigenvalues) {
        if (c.stability != Stability::asymptotically_stable) all_asymptotic = false;
        if (c.stability == Stability::unstable) any_unstable = true;
    }
    if (all_asymptotic) {
        out.verdict = Verdict::asymptotically_stable;
    } else if (any_unstable || critical_defective) {
        out.verdict = Verdict::unstable;
    } else {
        out.verdict = Verdict::stable;
    }

    if (sys.dimension() == 2) {
        if (real_eigs.size() == 2) {
            const double l1 = real_eigs[0];
            const double l2 = real_eigs[1];
            if (l1 == 0.0 || l2 == 0.0) {
                out.portrait = Portrait::degenerate;
            } else if (l1 > 0.0 && l2 > 0.0) {
                out.portrait = Portrait::source;
            } else if (l1 < 0.0 && l2 < 0.0) {
                out.portrait = Portrait::sink_node;
                if (l1 != l2) {
                    out.weaker_eigenvalue = std::abs(l1) < std::abs(l2) ? l1 : l2;
                    out.stronger_eigenvalue = std::abs(l1) < std::abs(l2) ? l2 : l1;
                }
            } else {
                out.portrait = Portrait::saddle;
            }
        } else {
            out.portrait = out.eigenvalues.front().portrait;
        }
    }
    return out;
}

struct Rational {
    long num = 1;
    long den = 1;
};

struct IncommensurateSpec {
    std::vector<Rational> orders;
    Eigen::MatrixXd jacobian;
};

struct IncommensurateOptions {
    int max_degree = 12;
    double root_residual_tol = 1e-10;
};

struct IncommensurateResult {
    long M = 1;
    Poly characteristic;  ///< det(diag(lambda^(M alpha_i)) - J), increasing degree
    std::vector<Complex> roots;
    bool stable = false;
    double threshold_angle = 0.0;  ///< pi / (2M)
};

/// det(diag(lambda^(M alpha_1), ..., lambda^(M alpha_n)) - J) = 0 with M the lcm of the
/// order denominators; stable when every root has |arg| > pi/(2M).
[[nodiscard]] inline IncommensurateResult classify_incommensurate(const IncommensurateSpec& spec,
                                                                  const IncommensurateOptions& opt = {}) {
    const std::size_t n = spec.orders.size();
    require(n >= 1, ErrorCode::DomainError, "need at least one order");
    require(spec.jacobian.rows() == static_cast<Eigen::Index>(n) && spec.jacobian.cols() == static_cast<Eigen::Index>(n),
            ErrorCode::DomainError, "jacobian must be square with one row per order");
    std::vector<Rational> ord = spec.orders;
    long M = 1;
    for (Rational& q : ord) {
        require(q.den > 0 && q.num > 0, ErrorCode::DomainError, "orders must be positive rationals");
        const long g = std::gcd(q.num, q.den);
        q.num /= g;
        q.den /= g;
        require(q.num < 2 * q.den, ErrorCode::DomainError, "orders must lie in (0, 2)");
        M = std::lcm(M, q.den);
    }
    std::vector<long> powers;
    long total = 0;
    for (const Rational& q : ord) {
        powers.push_back(M / q.den * q.num);
        total += powers.back();
    }
    require(total <= opt.max_degree, ErrorCode::DegreeTooLarge,
            "characteristic degree " + std::to_string(total) + " exceeds the bound " + std::to_string(opt.max_degree));

    std::vector<std::vector<Poly>> delta(n, std::vector<Poly>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double jij = spec.jacobian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (i == j) {
                Poly p(static_cast<std::size_t>(powers[i] + 1), 0.0);
                p.back() = 1.0;
                p[0] -= jij;
                delta[i][j] = p;
            } else {
                delta[i][j] = {-jij};
            }
        }
    }
    IncommensurateResult out;
    out.M = M;
    out.characteristic = poly::determinant(delta);
    out.roots = poly::roots(out.characteristic);
    out.threshold_angle = std::numbers::pi / (2.0 * static_cast<double>(M));
    out.stable = true;
    for (const Complex& r : out.roots) {
        // Check against det(Delta(r)) evaluated directly, independent of the expanded polynomial.
        Eigen::MatrixXcd d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto ii = static_cast<Eigen::Index>(i);
                const auto jj = static_cast<Eigen::Index>(j);
                d(ii, jj) = -spec.jacobian(ii, jj);
                if (i == j) d(ii, jj) += std::pow(r, static_cast<double>(powers[i]));
            }
        }
        const double residual = std::abs(d.determinant());
        const double scale = poly::eval_abs(out.characteristic, std::abs(r));
        require(residual <= opt.root_residual_tol * std::max(1.0, scale), ErrorCode::IllConditionedRoots,
                "root residual " + std::to_string(residual) + " exceeds tolerance");
        if (r == Complex(0.0, 0.0) || !(std::abs(std::arg(r)) > out.threshold_angle)) out.stable = false;
    }
    return out;
}

struct DecayFit {
    double slope = 0.0;
    double t_from = 0.0;
    double t_to = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of log||X|| against log t over the final two decades of
/// the trajectory, each sample weighted by its share of log t. Samples whose
/// norm is zero or has underflowed are dropped.
[[nodiscard]] inline DecayFit decay_exponent_fit(const Trajectory& traj, double decades = 2.0) {
    require(traj.samples.size() >= 3, ErrorCode::InsufficientRange, "need at least three samples");
    const double t0 = traj.samples.front().t;
    const double t1 = traj.samples.back().t;
    require(t0 > 0.0 && t1 / t0 >= 100.0 * (1.0 - 1e-12), ErrorCode::InsufficientRange,
            "trajectory must span at least two decades of t with t > 0");
    const double from = std::max(t0, t1 / std::pow(10.0, decades));
    std::vector<double> lx;
    std::vector<double> ly;
    for (const Sample& s : traj.samples) {
        if (s.t < from * (1.0 - 1e-12)) continue;
        double n2 = 0.0;
        for (double v : s.state) n2 += v * v;
        if (!(n2 > std::numeric_limits<double>::min())) continue;
        lx.push_back(std::log(s.t));
        ly.push_back(0.5 * std::log(n2));
    }
    require(lx.size() >= 3, ErrorCode::InsufficientRange, "fewer than three usable samples in the fit window");
    std::vector<double> w(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double left = i > 0 ? lx[i] - lx[i - 1] : 0.0;
        const double right = i + 1 < lx.size() ? lx[i + 1] - lx[i] : 0.0;
        w[i] = 0.5 * (left + right);
    }
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sw += w[i];
        sx += w[i] * lx[i];
        sy += w[i] * ly[i];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
        sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
    }
    require(sxx > 0.0, ErrorCode::InsufficientRange, "fit window has no spread in log t");
    return {sxy / sxx, std::exp(lx.front()), std::exp(lx.back()), lx.size()};
}

[[nodiscard]] inline double decay_exponent(const Trajectory& traj) { return decay_exponent_fit(traj).slope; }

}  // namespace fracdyn
