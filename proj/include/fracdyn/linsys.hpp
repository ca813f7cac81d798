#pragma once

// Closed-form solutions of  D^alpha X = A X,  X(0) = x0  (Caputo, 0 < alpha <= 1)
// with A in real canonical form, optionally conjugated by a similarity P.

#include "fracdyn/error.hpp"
#include "fracdyn/mlf.hpp"
#include "fracdyn/trajectory.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fracdyn {

struct RealEigen {
    double lambda = 0.0;
};

/// Single Jordan block, lambda on the diagonal and ones on the superdiagonal.
struct JordanBlock {
    double lambda = 0.0;
    int size = 2;
};

/// The 2x2 block [[a, b], [-b, a]] with eigenvalues a +- ib.
struct ComplexPair {
    double a = 0.0;
    double b = 1.0;

    [[nodiscard]] static ComplexPair polar(double r, double theta) {
        return {r * std::cos(theta), r * std::sin(theta)};
    }
};

using CanonicalBlock = std::variant<RealEigen, JordanBlock, ComplexPair>;

[[nodiscard]] inline int block_dimension(const CanonicalBlock& b) {
    return std::visit(
        [](const auto& blk) -> int {
            using T = std::decay_t<decltype(blk)>;
            if constexpr (std::is_same_v<T, RealEigen>) return 1;
            else if constexpr (std::is_same_v<T, JordanBlock>) return blk.size;
            else return 2;
        },
        b);
}

struct FractionalLinearSystem {
    double alpha = 0.5;
    std::vector<CanonicalBlock> blocks;
    std::optional<Eigen::MatrixXd> transform_P;
    State x0;
    /// Largest accepted 2-norm condition number of transform_P.
    double max_condition = 1e12;

    [[nodiscard]] int dimension() const {
        int n = 0;
        for (const auto& b : blocks) n += block_dimension(b);
        return n;
    }

    void validate() const {
        require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0, ErrorCode::DomainError,
                "system order alpha must lie in (0, 1], got " + std::to_string(alpha));
        require(!blocks.empty(), ErrorCode::DomainError, "system has no blocks");
        for (const auto& b : blocks) {
            if (const auto* j = std::get_if<JordanBlock>(&b)) {
                require(j->size >= 2, ErrorCode::DomainError, "Jordan block size must be >= 2");
                require(std::isfinite(j->lambda), ErrorCode::DomainError, "non-finite eigenvalue");
            } else if (const auto* c = std::get_if<ComplexPair>(&b)) {
                require(c->b != 0.0 && std::isfinite(c->a) && std::isfinite(c->b), ErrorCode::DomainError,
                        "complex pair needs finite a and b != 0");
            } else {
                require(std::isfinite(std::get<RealEigen>(b).lambda), ErrorCode::DomainError, "non-finite eigenvalue");
            }
        }
        const int n = dimension();
        require(static_cast<int>(x0.size()) == n, ErrorCode::DomainError,
                "x0 has length " + std::to_string(x0.size()) + ", blocks need " + std::to_string(n));
        for (double v : x0) require(std::isfinite(v), ErrorCode::DomainError, "non-finite initial state");
        if (transform_P) {
            require(transform_P->rows() == n && transform_P->cols() == n, ErrorCode::DomainError,
                    "transform_P must be " + std::to_string(n) + "x" + std::to_string(n));
        }
    }
};

namespace detail {

struct PreparedSystem {
    std::optional<Eigen::MatrixXd> P;
    Eigen::VectorXd y0;  ///< canonical initial state P^{-1} x0
};

inline PreparedSystem prepare(const FractionalLinearSystem& sys) {
    sys.validate();
    PreparedSystem out;
    const Eigen::Map<const Eigen::VectorXd> x0(sys.x0.data(), static_cast<Eigen::Index>(sys.x0.size()));
    if (!sys.transform_P) {
        out.y0 = x0;
        return out;
    }
    const Eigen::MatrixXd& P = *sys.transform_P;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    require(smin > 0.0 && sv(0) / smin <= sys.max_condition, ErrorCode::SingularTransform,
            "transform_P is singular or too ill-conditioned (condition " +
                (smin > 0.0 ? std::to_string(sv(0) / smin) : std::string("inf")) + ")");
    out.P = P;
    out.y0 = Eigen::FullPivLU<Eigen::MatrixXd>(P).solve(x0);
    return out;
}

/// Canonical solution Y(t) for initial state y0.
inline Eigen::VectorXd canonical_solution(const FractionalLinearSystem& sys, const Eigen::VectorXd& y0, double t,
                                          const MLParams& base) {
    MLParams p = base;
    p.alpha = sys.alpha;
    p.beta = 1.0;
    const double ta = std::pow(t, sys.alpha);
    Eigen::VectorXd y(y0.size());
    Eigen::Index off = 0;
    for (const auto& blk : sys.blocks) {
        if (const auto* re = std::get_if<RealEigen>(&blk)) {
            y(off) = ml1(p, Complex(re->lambda * ta, 0.0)).real() * y0(off);
            off += 1;
        } else if (const auto* jb = std::get_if<JordanBlock>(&blk)) {
            // Row i: sum_j t^(j alpha) E^(j)(lambda t^alpha) / j! * c_{i+j}.
            const Complex z(jb->lambda * ta, 0.0);
            std::vector<double> coef(static_cast<std::size_t>(jb->size));
            double tpow = 1.0;
            double fact = 1.0;
            for (int j = 0; j < jb->size; ++j) {
                if (j > 0) {
                    tpow *= ta;
                    fact *= j;
                }
                coef[static_cast<std::size_t>(j)] = tpow * ml_deriv(p, j, z).real() / fact;
            }
            for (int i = 0; i < jb->size; ++i) {
                double acc = 0.0;
                for (int j = 0; i + j < jb->size; ++j) acc += coef[static_cast<std::size_t>(j)] * y0(off + i + j);
                y(off + i) = acc;
            }
            off += jb->size;
        } else {
            const auto& cp = std::get<ComplexPair>(blk);
            const Complex e = ml1(p, Complex(cp.a, cp.b) * ta);
            const double c1 = y0(off);
            const double c2 = y0(off + 1);
            y(off) = e.real() * c1 + e.imag() * c2;
            y(off + 1) = -e.imag() * c1 + e.real() * c2;
            off += 2;
        }
    }
    return y;
}

}  // namespace detail

/// X(t) for the system; with transform_P, X = P Y where Y solves the canonical
/// system from P^{-1} x0.
[[nodiscard]] inline State solve_at(const FractionalLinearSystem& sys, double t, const MLParams& base = {}) {
    require(std::isfinite(t) && t >= 0.0, ErrorCode::DomainError, "t must be finite and non-negative");
    const detail::PreparedSystem prep = detail::prepare(sys);
    Eigen::VectorXd y = detail::canonical_solution(sys, prep.y0, t, base);
    if (prep.P) y = (*prep.P) * y;
    return State(y.data(), y.data() + y.size());
}

[[nodiscard]] inline Trajectory sample_trajectory(const FractionalLinearSystem& sys, double t_start, double t_end,
                                                  const SamplingPolicy& policy, const MLParams& base = {}) {
    const detail::PreparedSystem prep = detail::prepare(sys);
    const auto f = [&](double t) -> State {
        Eigen::VectorXd y = detail::canonical_solution(sys, prep.y0, t, base);
        if (prep.P) y = (*prep.P) * y;
        return State(y.data(), y.data() + y.size());
    };
    Trajectory traj = sample_curve(f, t_start, t_end, policy);
    traj.alpha = sys.alpha;
    traj.source = "linear system, dimension " + std::to_string(sys.dimension());
    return traj;
}

/// Canonical form of a real 2x2 matrix: blocks plus the similarity P with
/// P^{-1} A P equal to the block-diagonal matrix.
struct PlanarCanonicalForm {
    std::vector<CanonicalBlock> blocks;
    std::optional<Eigen::MatrixXd> P;
};

[[nodiscard]] inline PlanarCanonicalForm canonicalize_2x2(const Eigen::Matrix2d& A) {
    for (Eigen::Index i = 0; i < 4; ++i) {
        require(std::isfinite(A.data()[i]), ErrorCode::DomainError, "matrix entries must be finite");
    }
    const double tr = A.trace();
    const double det = A.determinant();
    const double disc = 0.25 * tr * tr - det;
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const double tiny = 1e-14 * scale * scale;
    PlanarCanonicalForm out;
    Eigen::Matrix2d P;
    if (disc > tiny) {
        const double s = std::sqrt(disc);
        // Stable pair: the larger-magnitude root directly, the other from the product.
        const double l1 = 0.5 * tr + (tr >= 0.0 ? s : -s);
        const double l2 = l1 != 0.0 ? det / l1 : 0.5 * tr - (tr >= 0.0 ? s : -s);
        const auto eigvec = [&](double l) -> Eigen::Vector2d {
            const Eigen::Vector2d v1(A(0, 1), l - A(0, 0));
            const Eigen::Vector2d v2(l - A(1, 1), A(1, 0));
            return v1.norm() >= v2.norm() ? v1.normalized() : v2.normalized();
        };
        P.col(0) = eigvec(l1);
        P.col(1) = eigvec(l2);
        out.blocks = {RealEigen{l1}, RealEigen{l2}};
        out.P = P;
    } else if (disc < -tiny) {
        const double a = 0.5 * tr;
        const double b = std::sqrt(-disc);
        // v with A v = (a + ib) v; P = [Re v, Im v] gives P^{-1} A P = [[a, b], [-b, a]].
        Eigen::Vector2cd v;
        if (std::abs(A(0, 1)) >= std::abs(A(1, 0))) {
            v << Complex(A(0, 1), 0.0), Complex(a - A(0, 0), b);
        } else {
            v << Complex(a - A(1, 1), b), Complex(A(1, 0), 0.0);
        }
        P.col(0) = v.real();
        P.col(1) = v.imag();
        out.blocks = {ComplexPair{a, b}};
        out.P = P;
    } else {
        const double l = 0.5 * tr;
        const Eigen::Matrix2d N = A - l * Eigen::Matrix2d::Identity();
        if (N.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
            out.blocks = {RealEigen{l}, RealEigen{l}};
            return out;
        }
        // p2 outside ker N, p1 = N p2: A p1 = l p1, A p2 = l p2 + p1.
        const Eigen::Vector2d e1(1.0, 0.0);
        const Eigen::Vector2d e2(0.0, 1.0);
        const Eigen::Vector2d p2 = (N * e1).norm() >= (N * e2).norm() ? e1 : e2;
        P.col(0) = N * p2;
        P.col(1) = p2;
        out.blocks = {JordanBlock{l, 2}};
        out.P = P;
    }
    return out;
}

/// Planar system D^alpha X = A X for a general real 2x2 matrix A.
[[nodiscard]] inline FractionalLinearSystem system_from_matrix(double alpha, const Eigen::Matrix2d& A, const State& x0) {
    PlanarCanonicalForm cf = canonicalize_2x2(A);
    FractionalLinearSystem sys;
    sys.alpha = alpha;
    sys.blocks = std::move(cf.blocks);
    sys.transform_P = std::move(cf.P);
    sys.x0 = x0;
    sys.validate();
    return sys;
}

struct QuadraturePolicy {
    /// Accepted error estimate, relative to 1 + |integral|.
    double tolerance = 1e-10;
    std::size_t max_refinements = 15;
};

struct ScalarSolution {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// y(x) for  D^alpha y + lambda y = g,  y(0) = y0:
///   y(x) = int_0^x t^(alpha-1) E_{alpha,alpha}(-lambda t^alpha) g(x - t) dt + y0 E_alpha(-lambda x^alpha).
/// The substitution u = t^alpha turns the weakly singular kernel into the smooth
///   (1/alpha) int_0^(x^alpha) E_{alpha,alpha}(-lambda u) g(x - u^(1/alpha)) du.
[[nodiscard]] inline ScalarSolution solve_scalar_nonhomogeneous(double alpha, double lambda,
                                                                const std::function<double(double)>& g, double y0,
                                                                double x, const QuadraturePolicy& quad = {},
                                                                const MLParams& base = {}) {
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0, ErrorCode::DomainError, "alpha must lie in (0, 1]");
    require(std::isfinite(x) && x > 0.0, ErrorCode::DomainError, "x must be positive");
    require(std::isfinite(lambda) && std::isfinite(y0), ErrorCode::DomainError, "lambda and y0 must be finite");
    MLParams kernel = base;
    kernel.alpha = alpha;
    kernel.beta = alpha;
    MLParams one = kernel;
    one.beta = 1.0;

    const double upper = std::pow(x, alpha);
    const auto integrand = [&](double u) {
        const double t = std::pow(u, 1.0 / alpha);
        return ml2(kernel, Complex(-lambda * u, 0.0)).real() * g(std::max(0.0, x - t));
    };
    boost::math::quadrature::tanh_sinh<double> rule(quad.max_refinements);
    double err = 0.0;
    double l1 = 0.0;
    const double integral = rule.integrate(integrand, 0.0, upper, 0.01 * quad.tolerance, &err, &l1) / alpha;
    err /= alpha;
    require(std::isfinite(integral) && err <= quad.tolerance * (1.0 + std::abs(integral)), ErrorCode::QuadratureFailure,
            "quadrature error estimate " + std::to_string(err) + " exceeds tolerance");
    return {integral + y0 * ml1(one, Complex(-lambda * upper, 0.0)).real(), err};
}

}  // namespace fracdyn
