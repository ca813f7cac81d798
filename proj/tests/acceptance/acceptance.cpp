// Acceptance run: criteria 1-12, one PASS/FAIL line each. Exit status is the
// number of failed criteria (0 when everything passes).

#include "fracdyn/fracdyn.hpp"
#include "fracdyn/service.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace fracdyn;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 4) { return io::fmt(v, digits); }

// 1 ---------------------------------------------------------------------------
Outcome ml_identities() {
    const auto t0 = Clock::now();
    double e1 = 0.0, e2 = 0.0, e12 = 0.0, rec = 0.0;
    int grid = 0;
    const MLParams p1 = MLParams::with(1.0);
    for (int i = -20; i <= 20; ++i) {
        for (int j = -20; j <= 20; ++j) {
            const Complex z(0.25 * i, 0.25 * j);
            if (std::abs(z) > 5.0) continue;
            ++grid;
            e1 = std::max(e1, std::abs(ml1(p1, z) - std::exp(z)));
            if (std::abs(z) > 0.0) {
                e12 = std::max(e12, std::abs(ml2(MLParams::with(1.0, 2.0), z) - (std::exp(z) - 1.0) / z));
            }
        }
    }
    for (int k = 0; k <= 500; ++k) {
        const double t = 5.0 * k / 500;
        e2 = std::max(e2, std::abs(ml1(MLParams::with(2.0), -t * t).real() - std::cos(t)));
    }
    for (int ai = 1; ai <= 9; ++ai) {
        const double a = 0.1 * ai;
        for (double b : {0.5, 1.0, 2.0}) {
            for (double w : {0.5, 3.0, 12.0, 25.0, 45.0}) {
                for (double phi : {0.0, 0.7, 1.6, 2.4, pi}) {
                    const Complex z = std::polar(std::pow(w, a), phi);
                    const Complex lhs = ml2(MLParams::with(a, b), z);
                    const Complex rhs = 1.0 / std::tgamma(b) + z * ml2(MLParams::with(a, a + b), z);
                    rec = std::max(rec, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = grid >= 1000 && e1 < 1e-10 && e2 < 1e-10 && e12 < 1e-10 && rec < 1e-9 && secs < 10.0;
    return {ok, "grid=" + std::to_string(grid) + " |E1-exp|=" + num(e1, 2) + " |E2-cos|=" + num(e2, 2) +
                    " |E12|=" + num(e12, 2) + " recurrence=" + num(rec, 2) + " time=" + num(secs, 3) + "s"};
}

// 2 ---------------------------------------------------------------------------
Outcome series_asymptotic_overlap() {
    const auto t0 = Clock::now();
    std::ostringstream det;
    bool ok = true;
    for (double a : {0.3, 0.6, 0.9}) {
        double worst = 0.0;
        for (double b : {1.0, a}) {
            const MLParams p = MLParams::with(a, b);
            const double mu = p.sector();
            for (double mod = 10.0; mod <= 20.0; mod += 1.0) {
                for (int k = -10; k <= 10; ++k) {
                    const Complex z = std::polar(mod, mu * k / 10.0);
                    worst = std::max(worst, relative_difference(ml2_convergent_scaled(p, z), ml_asymptotic_scaled(p, z)));
                }
            }
        }
        det << "alpha=" << a << ":" << num(worst, 2) << " ";
        ok = ok && worst < 1e-6;
    }
    const double secs = seconds_since(t0);
    det << "time=" << num(secs, 3) << "s";
    return {ok && secs < 10.0, det.str()};
}

// 3 ---------------------------------------------------------------------------
Outcome derivative_identity() {
    double worst = 0.0;
    for (double a : {0.2, 0.5, 0.8}) {
        for (double theta : {0.0, a * pi / 2, 2.0, 3.0}) {
            for (double t : {0.5, 2.0, 10.0, 40.0}) {
                const Complex lambda = std::polar(1.0, theta);
                const auto E = [&](double s) { return ml1(MLParams::with(a), lambda * std::pow(s, a)); };
                const double h = 1e-5 * t;
                const Complex fd = (E(t + h) - E(t - h)) / (2.0 * h);
                const Complex exact = lambda * std::pow(t, a - 1.0) * ml2(MLParams::with(a, a), lambda * std::pow(t, a));
                worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
            }
        }
    }
    return {worst < 1e-5, "max relative error " + num(worst, 3)};
}

// 4 ---------------------------------------------------------------------------
Outcome limit_circles() {
    const auto t0 = Clock::now();
    std::ostringstream det;
    bool ok = true;
    for (double a : {0.3, 0.7}) {
        const auto rep = limit_circle(a, 1.0, {1.0, 0.0}, {400.0, 500.0});
        const Point2 x = curve_position(MLCurve{a, 1.0, a * pi / 2, {1.0, 0.0}}, 500.0);
        det << "alpha=" << a << " mean|X| on [400,500]=" << num(rep.sampled_radius, 6) << " (1/alpha="
            << num(1.0 / a, 6) << ", err " << num(100 * rep.relative_error, 3) << "%, |X(500)|="
            << num(std::hypot(x[0], x[1]), 6) << ") ";
        ok = ok && rep.relative_error < 0.01;
    }
    const double secs = seconds_since(t0);
    det << "time=" << num(secs, 3) << "s";
    return {ok && secs < 30.0, det.str()};
}

// 5 ---------------------------------------------------------------------------
Outcome decay_law() {
    std::ostringstream det;
    bool ok = true;
    for (double a : {0.5, 0.8}) {
        Trajectory tr;
        for (int i = 0; i <= 400; ++i) {
            const double t = std::pow(10.0, 2.0 + 2.0 * i / 400.0);
            tr.samples.push_back({t, {std::abs(ml1(MLParams::with(a), -std::pow(t, a)))}});
        }
        const double slope = decay_exponent_fit(tr).slope;
        det << "alpha=" << a << " slope=" << num(slope, 5) << " ";
        ok = ok && std::abs(slope + a) <= 0.05;
    }
    return {ok, det.str()};
}

// 6 ---------------------------------------------------------------------------
Outcome zero_anchors() {
    std::ostringstream det;
    bool ok = true;
    const struct {
        double alpha, lo, hi;
    } cases[] = {{0.2, 17.5, 19.5}, {0.8, 22.0, 27.0}};
    for (const auto& c : cases) {
        const double zmax = std::pow(40.0, c.alpha);
        const auto zeros = ml_zeros(MLParams::with(c.alpha, c.alpha), {-zmax, zmax, 0.0, zmax}, 1e-10);
        bool hit = false;
        det << "alpha=" << c.alpha << " t0 in [" << c.lo << "," << c.hi << "]? zeros t0=";
        for (const auto& z : zeros) {
            const double t = std::pow(z.modulus, 1.0 / c.alpha);
            if (t > 40.0) continue;
            det << num(t, 7) << " ";
            hit = hit || (t >= c.lo && t <= c.hi);
        }
        det << (hit ? "(in window) " : "(none in window) ");
        ok = ok && hit;
    }
    return {ok, det.str()};
}

// 7 ---------------------------------------------------------------------------
Outcome region_table() {
    const auto t0 = Clock::now();
    std::ostringstream det;
    bool ok = true;
    const struct {
        double alpha, d1, d2;
    } rows[] = {{0.1, 0.0014, 0.0639}, {0.5, 0.0057, 0.3416}, {0.9, 0.0031, 0.7963}};
    for (const auto& r : rows) {
        const auto est = estimate_deltas(r.alpha, 1.0);
        const bool d2ok = std::abs(est.delta2 - r.d2) <= 0.15 * r.d2;
        const bool d1ok = std::abs(est.delta1 - r.d1) <= 0.003;
        det << "alpha=" << r.alpha << " d1=" << num(est.delta1, 4) << " (" << r.d1 << ") d2=" << num(est.delta2, 4)
            << " (" << r.d2 << ", " << num(100 * (est.delta2 - r.d2) / r.d2, 3) << "%) ";
        ok = ok && d2ok && d1ok && est.delta2 > est.delta1;
    }
    det << "time=" << num(seconds_since(t0), 3) << "s";
    return {ok, det.str()};
}

// 8 ---------------------------------------------------------------------------
Outcome singular_regimes() {
    std::ostringstream det;
    bool ok = true;
    const struct {
        const char* name;
        double alpha, r, eps, t_max;
        bool need_cusp;
    } sets[] = {
        {"a", 0.1, 1.0, 0.025, 500.0, false},
        {"b", 0.3, 0.5, 0.029, 1000.0, false},  // first crossing after t = 0.5 is at t ~ 500.8
        {"c", 0.6, 1.0, 0.042, 500.0, true},
        {"d", 0.9, 1.5, 0.225, 500.0, false},
    };
    for (const auto& s : sets) {
        const auto pts = detect_singularities(MLCurve{s.alpha, s.r, s.alpha * pi / 2 + s.eps, {1.0, 0.0}}, 0.5, s.t_max);
        std::size_t cusps = 0;
        for (const auto& p : pts) cusps += p.kind == SingularKind::cusp;
        det << s.name << ":" << pts.size() << " (" << cusps << " cusp) ";
        ok = ok && !pts.empty() && (!s.need_cusp || cusps > 0);
    }
    for (double a : {0.3, 0.6}) {
        for (double theta : {0.0, pi}) {
            const auto pts = detect_singularities(MLCurve{a, 1.0, theta, {1.0, 0.0}}, 0.5, 500.0);
            det << "theta=" << num(theta, 3) << ",alpha=" << a << ":" << pts.size() << " ";
            ok = ok && pts.empty();
        }
    }
    return {ok, det.str()};
}

// 9 ---------------------------------------------------------------------------
Outcome curve_fixtures() {
    std::ostringstream det;
    bool ok = true;
    {
        const auto c = curves::nodal_cubic();
        const auto pts = detect_singularities(c, c.t_min, c.t_max);
        const bool good = pts.size() == 1 && pts[0].kind == SingularKind::double_point &&
                          std::abs(pts[0].location[0] - 3.0) < 1e-6 && std::abs(pts[0].location[1]) < 1e-6 &&
                          pts[0].parameters.size() == 2 && std::abs(pts[0].parameters[0] + std::sqrt(3.0)) < 1e-6 &&
                          std::abs(pts[0].parameters[1] - std::sqrt(3.0)) < 1e-6;
        det << "nodal:" << (good ? "ok" : "bad") << " ";
        ok = ok && good;
    }
    {
        const auto c = curves::figure_eight();
        const auto pts = detect_singularities(c, c.t_min, c.t_max);
        const bool good = pts.size() == 1 && pts[0].kind == SingularKind::double_point &&
                          std::hypot(pts[0].location[0], pts[0].location[1]) < 1e-6;
        det << "figure8:" << (good ? "ok" : "bad") << " ";
        ok = ok && good;
    }
    {
        const auto c = curves::reducible_parabola();
        const auto pts = detect_singularities(c, c.t_min, c.t_max);
        const auto cps = critical_points(c);
        const bool good = pts.empty() && cps.size() == 1 && cps[0].reducible;
        det << "parabola:" << (good ? "ok" : "bad") << " ";
        ok = ok && good;
    }
    {
        const auto c = curves::cuspidal_cubic();
        const auto tj = tangent_jump(c, 0.0, 0.1);
        bool increasing = tj.sequence.size() >= 2;
        for (std::size_t i = 1; i < tj.sequence.size(); ++i) increasing = increasing && tj.sequence[i] > tj.sequence[i - 1];
        det << "cusp jumps:";
        for (double s : tj.sequence) det << " " << num(s, 4);
        const bool good = increasing && pi - tj.sequence.back() < 0.05;
        ok = ok && good;
    }
    return {ok, det.str()};
}

// 10 --------------------------------------------------------------------------
Outcome incommensurate() {
    std::ostringstream det;
    const auto run = [](double j10) {
        IncommensurateSpec spec;
        spec.orders = {{1, 1}, {1, 2}};
        spec.jacobian = Eigen::MatrixXd(2, 2);
        spec.jacobian << 0.0, 1.0, j10, 0.0;
        return classify_incommensurate(spec);
    };
    const auto has = [](const std::vector<Complex>& roots, Complex z) {
        for (const Complex& r : roots) {
            if (std::abs(r - z) < 1e-8) return true;
        }
        return false;
    };
    const auto e2 = run(-2.0);
    const double c = std::cbrt(2.0);
    const bool e2ok = e2.M == 2 && e2.roots.size() == 3 && has(e2.roots, {-c, 0.0}) &&
                      has(e2.roots, std::polar(c, pi / 3)) && has(e2.roots, std::polar(c, -pi / 3)) && e2.stable;
    det << "E2: M=" << e2.M << " stable=" << e2.stable << (e2ok ? " roots match" : " roots differ");
    // E1: det(diag(l^2, l) - [[0,1],[1,0]]) = l^3 - 1; the stated roots belong to l^3 + 1.
    const auto e1 = run(1.0);
    const bool e1ok = e1.roots.size() == 3 && has(e1.roots, {1.0, 0.0}) && has(e1.roots, std::polar(1.0, 2 * pi / 3)) &&
                      has(e1.roots, std::polar(1.0, -2 * pi / 3)) && !e1.stable;
    det << "; E1: roots of l^3-1, stable=" << e1.stable << (e1ok ? " (computed value asserted)" : " (unexpected)");
    return {e2ok && e1ok, det.str()};
}

// 11 --------------------------------------------------------------------------
Outcome predictor_corrector() {
    std::ostringstream det;
    const auto err = [](double h) {
        FDESystemSpec s;
        s.orders = {0.5};
        s.x0 = {1.0};
        s.h = h;
        s.t_end = 1.0;
        s.field = [](double, const State& x) { return State{-x[0]}; };
        double e = 0.0;
        for (const auto& smp : solve_pc(s).samples) {
            e = std::max(e, std::abs(smp.state[0] - ml1(MLParams::with(0.5), -std::pow(smp.t, 0.5)).real()));
        }
        return e;
    };
    bool ok = true;
    double prev = err(0.02);
    det << "ratios:";
    for (double h : {0.01, 0.005, 0.0025, 0.00125}) {
        const double e = err(h);
        det << " " << num(prev / e, 4);
        ok = ok && prev / e >= 1.8;
        prev = e;
    }
    FDESystemSpec s;
    s.orders = {0.9, 0.9};
    s.x0 = {0.2, 0.0};
    s.h = 0.01;
    s.t_end = 100.0;
    s.field = quadratic_field();
    const auto tr = solve_pc(s);
    std::size_t doubles = 0;
    for (const auto& p : detect_singularities(SampledCurve{tr}, tr.t_front(), tr.t_back())) {
        doubles += p.kind == SingularKind::double_point;
    }
    det << "; quadratic system x0=(0.2,0), T=100: " << doubles << " double point(s)";
    return {ok && doubles >= 1, det.str()};
}

// 12 --------------------------------------------------------------------------
Outcome serialization() {
    std::ostringstream det;
    service::TrajectoryRequest q;
    q.alpha = 0.1;
    q.epsilon = 0.025;
    const TrajectoryDocument doc = service::ml_trajectory_document(q);
    const bool round_trip = documents_equal(parse_document(dump(doc)), doc);
    det << "round trip " << (round_trip ? "identical" : "differs") << " (" << doc.samples.size() << " samples, "
        << doc.singular_points.size() << " singular points)";

    httplib::Server srv;
    service::install_routes(srv);
    const int port = srv.bind_to_any_port("127.0.0.1");
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(300, 0);
    const std::string path = "/trajectory?alpha=0.3&r=0.5&epsilon=0.029&tmax=500";
    const auto a = cli.Get(path);
    const auto b = cli.Get(path);
    srv.stop();
    th.join();
    const bool same = a && b && a->status == 200 && a->body == b->body;
    det << "; /trajectory repeated: " << (same ? "byte-identical" : "differs") << " (" << (a ? a->body.size() : 0)
        << " bytes)";
    return {round_trip && same, det.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"ML identity suite", ml_identities},
        {"series/asymptotic overlap", series_asymptotic_overlap},
        {"derivative identity", derivative_identity},
        {"limit circle", limit_circles},
        {"decay law", decay_law},
        {"zero anchors", zero_anchors},
        {"Region II table reproduction", region_table},
        {"ML trajectory singular regimes", singular_regimes},
        {"analytic curve fixtures", curve_fixtures},
        {"incommensurate rule", incommensurate},
        {"predictor-corrector", predictor_corrector},
        {"serialization", serialization},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed;
}
