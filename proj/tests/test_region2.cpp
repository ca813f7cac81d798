#include "catch_amalgamated.hpp"

#include "fracdyn/region2.hpp"

#include <numbers>

using namespace fracdyn;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("boundary angle carries singular trajectories, deep sectors do not") {
    for (double a : {0.3, 0.5}) {
        CHECK(has_singular_trajectory(a, 1.0, a * pi / 2));
        CHECK_FALSE(has_singular_trajectory(a, 1.0, a * pi / 2 + 0.8));
        CHECK_FALSE(has_singular_trajectory(a, 1.0, a * pi / 2 - 0.1));
    }
}

TEST_CASE("probe input validation") {
    CHECK_THROWS_AS(region_probe(1.0, 1.0, 0.5, {}), Error);
    CHECK_THROWS_AS(region_probe(0.5, 0.0, 0.5, {}), Error);
    CHECK_THROWS_AS(region_probe(0.5, 1.0, 4.0, {}), Error);
}

TEST_CASE("estimate on a short window with coarse steps") {
    RegionDetection det;
    det.t_max = 100.0;
    EstimateOptions opt;
    opt.bisection_tol = 5e-3;
    opt.bisection_tol_low = 5e-4;
    opt.scan_step_high = 0.05;
    opt.scan_step_low = 2e-3;
    opt.gap_width_high = 0.1;
    opt.gap_width_low = 4e-3;
    const auto est = estimate_deltas(0.5, 1.0, det, opt);
    CHECK(est.delta2 > est.delta1);
    CHECK(est.delta1 >= 0.0);
    CHECK(est.theta_high == est.alpha * pi / 2 + est.delta2);
    CHECK(est.log.front().phase == "boundary");
    // Every bisection probe sits inside the bracket set by the scan.
    for (const auto& p : est.log) CHECK(p.theta >= 0.0);
}

TEST_CASE("no singular points at the boundary is reported") {
    RegionDetection det;
    det.t_max = 2.0;  // too short for any crossing
    CHECK_THROWS_MATCHES(estimate_deltas(0.5, 1.0, det), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == ErrorCode::NoSingularityAtBoundary;
                         }));
}
