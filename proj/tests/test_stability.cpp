#include "catch_amalgamated.hpp"

#include "fracdyn/linsys.hpp"
#include "fracdyn/stability.hpp"

#include <cmath>
#include <numbers>

using namespace fracdyn;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

bool has_root(const std::vector<Complex>& roots, Complex z, double tol) {
    for (const Complex& r : roots) {
        if (std::abs(r - z) < tol) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("eigenvalue i at alpha = 0.9 is in sector III and asymptotically stable") {
    const auto c = classify_eigenvalue(0.9, Complex(0.0, 1.0));
    CHECK(c.region == Sector::III);
    CHECK(c.stability == Stability::asymptotically_stable);
    CHECK(c.portrait == Portrait::spiral_sink);
    CHECK(c.arg_abs == Approx(pi / 2));
}

TEST_CASE("classification flips at |arg| = alpha pi / 2") {
    for (double a : {0.2, 0.5, 0.9}) {
        const double b = a * pi / 2;
        CHECK(classify_eigenvalue(a, std::polar(1.0, b - 0.01)).stability == Stability::unstable);
        CHECK(classify_eigenvalue(a, std::polar(1.0, b + 0.01)).stability == Stability::asymptotically_stable);
        CHECK(classify_eigenvalue(a, std::polar(1.0, b)).stability == Stability::critical);
        // conjugate symmetry
        CHECK(classify_eigenvalue(a, std::polar(2.0, -(b + 0.01))).stability == Stability::asymptotically_stable);
    }
}

TEST_CASE("Region II membership follows the band around the boundary") {
    const double a = 0.5;
    const auto d = default_deltas(a);
    CHECK(d.delta1 == Approx(0.0057));
    CHECK(d.delta2 == Approx(0.341602));
    const double b = a * pi / 2;
    CHECK(classify_eigenvalue(a, std::polar(1.0, b + 0.5 * d.delta2)).in_region_ii);
    CHECK(classify_eigenvalue(a, std::polar(1.0, b - 0.5 * d.delta1)).in_region_ii);
    CHECK_FALSE(classify_eigenvalue(a, std::polar(1.0, b + 1.5 * d.delta2)).in_region_ii);
    CHECK_FALSE(classify_eigenvalue(a, std::polar(1.0, b - 2.0 * d.delta1)).in_region_ii);
}

TEST_CASE("interpolated deltas grow monotonically in delta2") {
    double last = -1.0;
    for (double a = 0.05; a <= 0.95; a += 0.05) {
        const auto d = default_deltas(a);
        CHECK(d.delta2 > last);
        CHECK(d.delta2 > d.delta1);
        last = d.delta2;
    }
}

TEST_CASE("planar portrait names") {
    const auto portrait_of = [](double a, double b, double c, double d) {
        Eigen::Matrix2d A;
        A << a, b, c, d;
        return classify_system(system_from_matrix(0.5, A, {1.0, 0.0}));
    };
    CHECK(portrait_of(1.0, 0.0, 0.0, -2.0).portrait == Portrait::saddle);
    CHECK(portrait_of(1.0, 0.0, 0.0, -2.0).verdict == Verdict::unstable);
    CHECK(portrait_of(-1.0, 0.0, 0.0, -3.0).portrait == Portrait::sink_node);
    CHECK(portrait_of(-1.0, 0.0, 0.0, -3.0).weaker_eigenvalue == Approx(-1.0));
    CHECK(portrait_of(2.0, 0.0, 0.0, 1.0).portrait == Portrait::source);
    CHECK(portrait_of(0.0, 1.0, -1.0, 0.0).portrait == Portrait::spiral_sink);  // |arg i| > 0.5 pi/2
    CHECK(portrait_of(2.0, 1.0, -1.0, 2.0).portrait == Portrait::spiral_source);
    CHECK(portrait_of(1.0, 1.0, -1.0, 1.0).portrait == Portrait::boundary_orbit);  // |arg(1+i)| = 0.5 pi/2
    CHECK(portrait_of(0.0, 1.0, -1.0, 0.0).verdict == Verdict::asymptotically_stable);
}

TEST_CASE("decay exponent for Caputo vs Riemann-Liouville") {
    ClassifyOptions rl;
    rl.kind = DerivativeKind::riemann_liouville;
    CHECK(classify_eigenvalue(0.6, -1.0).decay_exponent == Approx(-0.6));
    CHECK(classify_eigenvalue(0.6, -1.0, rl).decay_exponent == Approx(-1.6));
}

TEST_CASE("incommensurate orders (1, 1/2), J = [[0,1],[-2,0]]: roots of l^3 + 2, stable") {
    IncommensurateSpec spec;
    spec.orders = {{1, 1}, {1, 2}};
    spec.jacobian = Eigen::MatrixXd(2, 2);
    spec.jacobian << 0.0, 1.0, -2.0, 0.0;
    const auto res = classify_incommensurate(spec);
    CHECK(res.M == 2);
    REQUIRE(res.roots.size() == 3);
    const double c = std::cbrt(2.0);
    CHECK(has_root(res.roots, {-c, 0.0}, 1e-8));
    CHECK(has_root(res.roots, std::polar(c, pi / 3), 1e-8));
    CHECK(has_root(res.roots, std::polar(c, -pi / 3), 1e-8));
    CHECK(res.stable);
    CHECK(res.threshold_angle == Approx(pi / 4));
}

TEST_CASE("incommensurate orders (1, 1/2), J = [[0,1],[1,0]]: det is l^3 - 1, unstable") {
    IncommensurateSpec spec;
    spec.orders = {{1, 1}, {1, 2}};
    spec.jacobian = Eigen::MatrixXd(2, 2);
    spec.jacobian << 0.0, 1.0, 1.0, 0.0;
    const auto res = classify_incommensurate(spec);
    REQUIRE(res.roots.size() == 3);
    CHECK(has_root(res.roots, {1.0, 0.0}, 1e-8));
    CHECK(has_root(res.roots, std::polar(1.0, 2 * pi / 3), 1e-8));
    CHECK_FALSE(has_root(res.roots, {-1.0, 0.0}, 1e-3));
    CHECK_FALSE(res.stable);
}

TEST_CASE("decay fit recovers t^-alpha") {
    for (double a : {0.5, 0.8}) {
        Trajectory tr;
        for (int i = 0; i <= 400; ++i) {
            const double t = std::pow(10.0, 2.0 + 2.0 * i / 400.0);
            tr.samples.push_back({t, {ml1(MLParams::with(a), -std::pow(t, a)).real()}});
        }
        CHECK(decay_exponent_fit(tr).slope == Approx(-a).margin(0.05));
    }
}

TEST_CASE("stability rejects invalid input") {
    CHECK_THROWS_AS(classify_eigenvalue(1.2, 1.0), Error);
    CHECK_THROWS_AS(classify_eigenvalue(0.5, Complex(NAN, 0.0)), Error);
    Trajectory short_tr;
    short_tr.samples = {{1.0, {1.0}}, {2.0, {0.5}}, {3.0, {0.3}}};
    CHECK_THROWS_AS(decay_exponent_fit(short_tr), Error);
}
