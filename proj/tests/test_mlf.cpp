#include "catch_amalgamated.hpp"

#include "fracdyn/mlf.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>

using namespace fracdyn;
using Catch::Approx;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("ML values match the frozen high-precision series") {
    for (const auto& o : oracle::kMLValues) {
        const Complex got = ml2(MLParams::with(o.alpha, o.beta), {o.z_re, o.z_im});
        INFO("alpha=" << o.alpha << " beta=" << o.beta << " z=" << o.z_re << "+" << o.z_im << "i");
        CHECK(rel(got, {o.re, o.im}) < 1e-11);
    }
}

TEST_CASE("E_0.5(+-1) anchors") {
    CHECK(ml1(MLParams::with(0.5), 1.0).real() == Approx(5.00898008076228).epsilon(1e-13));
    CHECK(ml1(MLParams::with(0.5), -1.0).real() == Approx(0.427583576155807).epsilon(1e-13));
}

TEST_CASE("closed forms") {
    SECTION("E_1 is exp") {
        for (double re = -5; re <= 5; re += 1.25) {
            for (double im = -4; im <= 4; im += 2) {
                const Complex z(re, im);
                CHECK(std::abs(ml1(MLParams::with(1.0), z) - std::exp(z)) < 1e-10 * std::max(1.0, std::abs(std::exp(z))));
            }
        }
    }
    SECTION("E_2(-t^2) is cos") {
        for (double t = 0.0; t <= 5.0; t += 0.25) {
            CHECK(std::abs(ml1(MLParams::with(2.0), -t * t).real() - std::cos(t)) < 1e-10);
        }
    }
    SECTION("E_{1,2}(z) = (e^z - 1)/z") {
        for (const Complex z : {Complex(0.5, 0.0), Complex(-3.0, 1.0), Complex(4.0, -2.0)}) {
            CHECK(rel(ml2(MLParams::with(1.0, 2.0), z), (std::exp(z) - 1.0) / z) < 1e-10);
        }
    }
    SECTION("E_{1/2}(z) = exp(z^2) erfc(-z) on the real axis") {
        for (double x : {-2.0, -0.5, 0.3, 1.5}) {
            CHECK(ml1(MLParams::with(0.5), x).real() == Approx(std::exp(x * x) * std::erfc(-x)).epsilon(1e-11));
        }
    }
}

TEST_CASE("recurrence E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z) holds across all routes") {
    for (double a : {0.2, 0.5, 0.8}) {
        for (double b : {0.5, 1.0, 2.0}) {
            // |z|^(1/a) from 1 to about 40 crosses the series, contour and asymptotic zones.
            for (double w : {1.0, 12.0, 40.0}) {
                for (double phi : {0.0, 1.0, 2.5}) {
                    const Complex z = std::polar(std::pow(w, a), phi);
                    const Complex lhs = ml2(MLParams::with(a, b), z);
                    const Complex rhs = 1.0 / std::tgamma(b) + z * ml2(MLParams::with(a, a + b), z);
                    INFO("a=" << a << " b=" << b << " w=" << w << " phi=" << phi);
                    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
                }
            }
        }
    }
}

TEST_CASE("series and asymptotic expansion agree where both apply") {
    const double a = 0.6;
    MLParams p = MLParams::with(a, 1.0);
    for (double mod : {10.0, 15.0, 20.0}) {
        for (double frac : {-0.9, 0.0, 0.9}) {
            const Complex z = std::polar(mod, frac * p.sector());
            CHECK(relative_difference(ml2_convergent_scaled(p, z), ml_asymptotic_scaled(p, z)) < 1e-6);
        }
    }
}

TEST_CASE("derivative matches a central difference") {
    const MLParams p = MLParams::with(0.7, 0.7);
    for (const Complex z : {Complex(0.3, 0.2), Complex(-4.0, 2.0), Complex(6.0, 1.0)}) {
        const double h = 1e-5;
        const Complex fd = (ml2(p, z + h) - ml2(p, z - h)) / (2.0 * h);
        CHECK(rel(ml_deriv(p, 1, z), fd) < 1e-7);
    }
}

TEST_CASE("scaled representation survives values beyond double range") {
    const ScaledComplex s = ml2_scaled(MLParams::with(0.5), 40.0);
    CHECK(s.log_abs() == Approx(1600.0 + std::log(2.0)).epsilon(1e-10));
    CHECK_THROWS_AS(s.value(), Error);
}

TEST_CASE("invalid parameters raise DomainError") {
    CHECK_THROWS_MATCHES(ml2(MLParams::with(0.0), 1.0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::DomainError; }));
    CHECK_THROWS_AS(ml2(MLParams::with(2.5), 1.0), Error);
    CHECK_THROWS_AS(ml2(MLParams::with(0.5, -1.0), 1.0), Error);
    CHECK_THROWS_AS(ml2(MLParams::with(0.5), Complex(NAN, 0.0)), Error);
}

TEST_CASE("zeros of E_{a,a} match the frozen table") {
    for (double a : {0.2, 0.8}) {
        const double zmax = std::pow(27.0, a);
        const auto zeros = ml_zeros(MLParams::with(a, a), {-zmax, zmax, 0.0, zmax}, 1e-10);
        for (const auto& o : oracle::kZeros) {
            if (o.alpha != a) continue;
            bool found = false;
            for (const auto& z : zeros) {
                if (std::abs(z.z - Complex(o.re, o.im)) < 1e-9) {
                    found = true;
                    CHECK(std::pow(z.modulus, 1.0 / a) == Approx(o.t0).epsilon(1e-9));
                    CHECK(z.residual <= 1e-10);
                }
            }
            INFO("alpha=" << a << " t0=" << o.t0);
            CHECK(found);
        }
    }
}

TEST_CASE("E_{0.8,0.8} zeros lie near the anchor t0 = 24.4") {
    const double a = 0.8;
    const double zmax = std::pow(30.0, a);
    const auto zeros = ml_zeros(MLParams::with(a, a), {-zmax, zmax, 0.0, zmax}, 1e-10);
    bool in_window = false;
    for (const auto& z : zeros) {
        const double t0 = std::pow(z.modulus, 1.0 / a);
        if (t0 >= 22.0 && t0 <= 27.0) in_window = true;
    }
    CHECK(in_window);
}
