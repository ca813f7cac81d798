#include "catch_amalgamated.hpp"

#include "fracdyn/fdesolve.hpp"
#include "fracdyn/linsys.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

using namespace fracdyn;
using Catch::Approx;

namespace {

State pc_solution(double alpha, const Eigen::MatrixXd& A, const State& x0, double t, double h) {
    FDESystemSpec s;
    s.orders.assign(x0.size(), alpha);
    s.x0 = x0;
    s.h = h;
    s.t_end = t;
    s.field = [A](double, const State& x) {
        const Eigen::VectorXd y = A * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        return State(y.data(), y.data() + y.size());
    };
    return solve_pc(s).samples.back().state;
}

double dist(const State& a, const State& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("alpha = 1 reduces to the matrix exponential") {
    const std::vector<Eigen::Matrix2d> mats = [] {
        std::vector<Eigen::Matrix2d> v(4);
        v[0] << -1.0, 0.0, 0.0, -3.0;  // distinct real
        v[1] << -0.5, 1.0, 0.0, -0.5;  // Jordan
        v[2] << -0.2, 2.0, -2.0, -0.2;  // complex pair
        v[3] << 1.0, 2.0, 3.0, -1.0;   // general, saddle
        return v;
    }();
    const State x0{0.7, -0.4};
    for (const auto& A : mats) {
        const auto sys = system_from_matrix(1.0, A, x0);
        for (double t : {0.5, 2.0}) {
            const Eigen::Vector2d ref = (A * t).exp() * Eigen::Vector2d(x0[0], x0[1]);
            const State got = solve_at(sys, t);
            INFO("A=\n" << A << "\nt=" << t);
            CHECK(got[0] == Approx(ref[0]).margin(1e-10).epsilon(1e-10));
            CHECK(got[1] == Approx(ref[1]).margin(1e-10).epsilon(1e-10));
        }
    }
}

TEST_CASE("canonical form is similar to the input matrix") {
    Eigen::Matrix2d A;
    A << 1.0, 2.0, -3.0, 0.5;
    const auto cf = canonicalize_2x2(A);
    REQUIRE(cf.blocks.size() == 1);
    const auto* cp = std::get_if<ComplexPair>(&cf.blocks.front());
    REQUIRE(cp != nullptr);
    REQUIRE(cf.P.has_value());
    Eigen::Matrix2d B;
    B << cp->a, cp->b, -cp->b, cp->a;
    const Eigen::Matrix2d back = (*cf.P) * B * cf.P->inverse();
    CHECK((back - A).norm() < 1e-12);
    CHECK(cp->a == Approx(0.75));
    CHECK(std::abs(cp->b) == Approx(std::sqrt(6.0 - 0.0625)));
}

TEST_CASE("fractional solution agrees with the predictor-corrector") {
    const double alpha = 0.7;
    const State x0{1.0, -0.5};
    std::vector<Eigen::Matrix2d> mats(3);
    mats[0] << -1.0, 1.0, 0.0, -1.0;
    mats[1] << -0.3, 1.5, -1.5, -0.3;
    mats[2] << 0.4, 0.0, 0.0, -2.0;
    for (const auto& A : mats) {
        const State ml = solve_at(system_from_matrix(alpha, A, x0), 2.0);
        const State pc = pc_solution(alpha, A, x0, 2.0, 1e-3);
        INFO("A=\n" << A);
        CHECK(dist(ml, pc) < 2e-4);
    }
}

TEST_CASE("diagonal block solutions are scalar Mittag-Leffler functions") {
    FractionalLinearSystem sys;
    sys.alpha = 0.4;
    sys.blocks = {RealEigen{-1.0}, RealEigen{0.5}, ComplexPair::polar(1.0, 2.0)};
    sys.x0 = {1.0, 2.0, 1.0, 0.0};
    const double t = 3.0;
    const State x = solve_at(sys, t);
    const MLParams p = MLParams::with(0.4);
    CHECK(x[0] == Approx(ml1(p, -std::pow(t, 0.4)).real()).epsilon(1e-12));
    CHECK(x[1] == Approx(2.0 * ml1(p, 0.5 * std::pow(t, 0.4)).real()).epsilon(1e-12));
    // [[a, b], [-b, a]] from (1, 0): x + i y = conj(E(lambda t^alpha))
    const Complex e = ml1(p, std::polar(1.0, 2.0) * std::pow(t, 0.4));
    CHECK(x[2] == Approx(e.real()).epsilon(1e-12));
    CHECK(x[3] == Approx(-e.imag()).epsilon(1e-12));
}

TEST_CASE("sampled trajectories start at x0 and are ordered") {
    Eigen::Matrix2d A;
    A << 0.0, 1.0, -1.0, -0.1;
    const auto tr = sample_trajectory(system_from_matrix(0.8, A, {1.0, 0.0}), 0.0, 20.0, AdaptiveSampling{});
    REQUIRE(tr.size() > 10);
    CHECK(tr.samples.front().state[0] == Approx(1.0));
    CHECK(tr.samples.front().state[1] == Approx(0.0).margin(1e-15));
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.samples[i - 1].t < tr.samples[i].t);
}

TEST_CASE("scalar nonhomogeneous equation with constant forcing") {
    // D^a y + l y = 1, y(0) = y0  =>  y = x^a E_{a,a+1}(-l x^a) + y0 E_a(-l x^a)
    const double a = 0.6, l = 2.0, y0 = 0.3, x = 1.7;
    const auto sol = solve_scalar_nonhomogeneous(a, l, [](double) { return 1.0; }, y0, x);
    const double xa = std::pow(x, a);
    const double ref = xa * ml2(MLParams::with(a, a + 1.0), -l * xa).real() + y0 * ml1(MLParams::with(a), -l * xa).real();
    CHECK(sol.value == Approx(ref).epsilon(1e-9));
}

TEST_CASE("linsys rejects bad input") {
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    CHECK_THROWS_AS(system_from_matrix(1.5, A, {1.0, 0.0}), Error);
    CHECK_THROWS_AS(system_from_matrix(0.5, A, {1.0}), Error);
    CHECK_THROWS_AS(solve_at(system_from_matrix(0.5, A, {1.0, 0.0}), -1.0), Error);
}
