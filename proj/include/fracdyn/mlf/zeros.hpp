#pragma once

// Complex zeros of E_{a,b} inside a rectangle: quadtree subdivision driven by
// an argument-principle count on each cell boundary, then damped Newton from
// the centre of every cell that isolates exactly one zero.

#include "fracdyn/mlf/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <numbers>
#include <string>
#include <vector>

namespace fracdyn {

struct Rect {
    double re_min = 0.0;
    double re_max = 0.0;
    double im_min = 0.0;
    double im_max = 0.0;

    [[nodiscard]] double width() const { return re_max - re_min; }
    [[nodiscard]] double height() const { return im_max - im_min; }
    [[nodiscard]] Complex center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
    [[nodiscard]] bool contains(Complex z, double pad = 0.0) const {
        return z.real() >= re_min - pad && z.real() <= re_max + pad && z.imag() >= im_min - pad &&
               z.imag() <= im_max + pad;
    }
};

struct MLZero {
    Complex z;
    double modulus = 0.0;
    double argument = 0.0;
    double residual = 0.0;  ///< |E_{a,b}(z)| after refinement
    Rect winding_cell;
};

struct ZeroSearchOptions {
    int edge_samples = 64;
    int max_edge_samples = 4096;
    int max_depth = 16;
    int max_cells = 20000;
    int max_newton = 80;
    /// Boundary samples with |f| below this fraction of the boundary maximum
    /// count as passing through a zero.
    double boundary_floor = 1e-12;
};

struct ZeroSearchResult {
    std::vector<MLZero> zeros;
    /// Cells whose Newton iteration failed (NewtonDivergence); not fatal.
    std::vector<std::string> failures;
};

namespace detail {

struct Winding {
    int count = 0;
    bool through_zero = false;
};

inline double wrap_angle(double d) {
    const double pi = std::numbers::pi;
    while (d > pi) d -= 2.0 * pi;
    while (d <= -pi) d += 2.0 * pi;
    return d;
}

/// Phase and log-modulus of f along one edge from a to b, refined until no
/// increment exceeds pi/4.
inline bool edge_phase(const MLParams& p, Complex a, Complex b, const ZeroSearchOptions& opt, double& phase_total,
                       double& log_min, double& log_max) {
    for (int n = opt.edge_samples; n <= opt.max_edge_samples; n *= 2) {
        double total = 0.0;
        double prev = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        bool suspicious = false;
        for (int i = 0; i <= n; ++i) {
            const Complex z = a + (b - a) * (static_cast<double>(i) / n);
            const ScaledComplex f = ml_eval(p.alpha, p.beta, z, p);
            const double la = f.log_abs();
            lo = std::min(lo, la);
            hi = std::max(hi, la);
            const double ph = std::arg(f.mantissa);
            if (i > 0) {
                const double d = wrap_angle(ph - prev);
                if (std::abs(d) > std::numbers::pi / 4.0) suspicious = true;
                total += d;
            }
            prev = ph;
        }
        if (!suspicious || n * 2 > opt.max_edge_samples) {
            phase_total = total;
            log_min = lo;
            log_max = hi;
            return !suspicious;
        }
    }
    return false;
}

inline Winding winding_number(const MLParams& p, const Rect& r, const ZeroSearchOptions& opt) {
    const std::array<Complex, 5> corners{Complex(r.re_min, r.im_min), Complex(r.re_max, r.im_min),
                                         Complex(r.re_max, r.im_max), Complex(r.re_min, r.im_max),
                                         Complex(r.re_min, r.im_min)};
    double total = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool clean = true;
    for (std::size_t e = 0; e < 4; ++e) {
        double ph = 0.0;
        double elo = 0.0;
        double ehi = 0.0;
        clean = edge_phase(p, corners[e], corners[e + 1], opt, ph, elo, ehi) && clean;
        total += ph;
        lo = std::min(lo, elo);
        hi = std::max(hi, ehi);
    }
    Winding w;
    w.count = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    w.through_zero = !clean || !(lo - hi > std::log(opt.boundary_floor));
    return w;
}

/// Damped Newton on E_{a,b}; returns false when the iterate leaves `box` or stalls.
inline bool newton_zero(const MLParams& p, Complex& z, const Rect& box, int max_iter, double& residual) {
    const double pad = 0.5 * std::max(box.width(), box.height());
    ScaledComplex f = ml_eval(p.alpha, p.beta, z, p);
    for (int it = 0; it < max_iter; ++it) {
        const ScaledComplex df = ml_deriv_eval(p.alpha, p.beta, 1, z, p);
        if (std::abs(df.mantissa) == 0.0) return false;
        const Complex step = f.mantissa / df.mantissa * std::exp(f.log_scale - df.log_scale);
        double damp = 1.0;
        Complex trial = z - step;
        ScaledComplex ft = ml_eval(p.alpha, p.beta, trial, p);
        for (int h = 0; h < 20 && ft.log_abs() > f.log_abs() && std::abs(step) * damp > 1e-15 * std::abs(z); ++h) {
            damp *= 0.5;
            trial = z - damp * step;
            ft = ml_eval(p.alpha, p.beta, trial, p);
        }
        z = trial;
        f = ft;
        if (!box.contains(z, pad)) return false;
        if (std::abs(step) * damp <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z))) {
            break;
        }
    }
    residual = std::exp(f.log_abs());
    return std::isfinite(residual);
}

}  // namespace detail

/// All zeros of E_{alpha,beta} inside `region`, sorted by modulus then argument.
[[nodiscard]] inline ZeroSearchResult ml_zeros_detailed(const MLParams& params, const Rect& region, double zero_tol,
                                                        const ZeroSearchOptions& opt = {}) {
    params.validate();
    require(zero_tol > 0.0, ErrorCode::DomainError, "zero_tol must be positive");
    require(std::isfinite(region.re_min) && std::isfinite(region.re_max) && std::isfinite(region.im_min) &&
                std::isfinite(region.im_max) && region.width() > 0.0 && region.height() > 0.0,
            ErrorCode::DomainError, "zero-search region must be a bounded non-empty rectangle");

    struct Cell {
        Rect rect;
        int depth;
        bool offset;
    };
    ZeroSearchResult out;
    std::deque<Cell> queue{{region, 0, false}};
    int processed = 0;
    while (!queue.empty()) {
        const Cell cell = queue.front();
        queue.pop_front();
        require(++processed <= opt.max_cells, ErrorCode::ContourThroughZero,
                "zero search exceeded its cell budget");
        const detail::Winding w = detail::winding_number(params, cell.rect, opt);

        const auto split = [&](bool offset) {
            require(cell.depth < opt.max_depth, ErrorCode::ContourThroughZero,
                    "a zero lies on a cell boundary at the subdivision limit");
            // An off-centre split moves the new edges away from a zero sitting on the old ones.
            const double f = offset ? 0.5 + 0.0731 : 0.5;
            const double xm = cell.rect.re_min + f * cell.rect.width();
            const double ym = cell.rect.im_min + f * cell.rect.height();
            const Rect& r = cell.rect;
            for (const Rect child : {Rect{r.re_min, xm, r.im_min, ym}, Rect{xm, r.re_max, r.im_min, ym},
                                     Rect{r.re_min, xm, ym, r.im_max}, Rect{xm, r.re_max, ym, r.im_max}}) {
                queue.push_back({child, cell.depth + 1, offset});
            }
        };

        if (w.through_zero) {
            split(!cell.offset);
            continue;
        }
        if (w.count <= 0) continue;
        if (w.count > 1) {
            if (cell.depth < opt.max_depth) {
                split(cell.offset);
                continue;
            }
        }
        Complex z = cell.rect.center();
        double residual = 0.0;
        const bool ok = detail::newton_zero(params, z, cell.rect, opt.max_newton, residual);
        if (ok && residual <= zero_tol && cell.rect.contains(z, 1e-12 * (1.0 + std::abs(z)))) {
            out.zeros.push_back({z, std::abs(z), std::arg(z), residual, cell.rect});
        } else if (cell.depth < opt.max_depth) {
            split(cell.offset);
        } else {
            out.failures.push_back("NewtonDivergence: no converged zero in cell centred at (" +
                                   std::to_string(cell.rect.center().real()) + ", " +
                                   std::to_string(cell.rect.center().imag()) + ")");
        }
    }

    // Neighbouring cells can both converge onto one zero sitting near their shared edge.
    std::vector<MLZero> unique;
    for (const MLZero& zr : out.zeros) {
        const bool dup = std::any_of(unique.begin(), unique.end(), [&](const MLZero& u) {
            return std::abs(u.z - zr.z) <= 1e-8 * (1.0 + std::abs(zr.z));
        });
        if (!dup) unique.push_back(zr);
    }
    // Real coefficients: report lower-half zeros as exact conjugates of their upper partners.
    for (MLZero& lower : unique) {
        if (lower.z.imag() >= 0.0) continue;
        for (const MLZero& upper : unique) {
            if (upper.z.imag() > 0.0 && std::abs(std::conj(upper.z) - lower.z) <= 1e-8 * (1.0 + std::abs(lower.z))) {
                lower.z = std::conj(upper.z);
                lower.modulus = upper.modulus;
                lower.argument = -upper.argument;
                lower.residual = upper.residual;
                break;
            }
        }
    }
    std::sort(unique.begin(), unique.end(), [](const MLZero& a, const MLZero& b) {
        if (a.modulus != b.modulus) return a.modulus < b.modulus;
        return a.argument < b.argument;
    });
    out.zeros = std::move(unique);
    return out;
}

[[nodiscard]] inline std::vector<MLZero> ml_zeros(const MLParams& params, const Rect& region, double zero_tol,
                                                  const ZeroSearchOptions& opt = {}) {
    return ml_zeros_detailed(params, region, zero_tol, opt).zeros;
}

}  // namespace fracdyn
