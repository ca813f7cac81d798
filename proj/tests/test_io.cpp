#include "catch_amalgamated.hpp"

#include "fracdyn/curves.hpp"
#include "fracdyn/io/csv.hpp"
#include "fracdyn/io/json.hpp"
#include "fracdyn/io/svg.hpp"

#include <clocale>
#include <cmath>
#include <numbers>
#include <random>

using namespace fracdyn;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

TrajectoryDocument sample_document() {
    TrajectoryDocument d;
    d.alpha = 0.3;
    d.eigenvalue = PolarEigenvalue{0.5, 0.3 * std::numbers::pi / 2 + 0.029};
    d.x0 = {1.0, 0.0};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double t = 0.5;
    for (int i = 0; i < 200; ++i) {
        // awkward values: subnormal-adjacent, huge, many digits
        d.samples.push_back({t, {u(rng) * 1e-300, u(rng) * 1e300}});
        t += 0.1 + std::abs(u(rng));
    }
    d.samples[3].state = {1.0 / 3.0, -2.0 / 7.0};
    SingularPoint p;
    p.kind = SingularKind::cusp;
    p.location = {0.1, 0.2};
    p.parameters = {d.samples[5].t};
    p.tangent_jump = 3.0999999999999996;
    p.speed_min = 4.79e-7;
    d.singular_points.push_back(p);
    SingularPoint q;
    q.parameters = {d.samples[10].t, d.samples[50].t};
    q.location = {std::nextafter(1.0, 2.0), -0.0};
    d.singular_points.push_back(q);
    d.region = {"II", 0.0039, 0.195761};
    d.provenance = make_provenance({{"t_start", 0.5}, {"t_max", 500.0}, {"merge_radius", 1e-6}});
    return d;
}

}  // namespace

TEST_CASE("TrajectoryDocument round trip is value-identical") {
    const auto d = sample_document();
    const auto back = parse_document(dump(d));
    CHECK(documents_equal(d, back));
    CHECK(dump(back) == dump(d));
    CHECK(documents_equal(parse_document(dump(d, 2)), d));
}

TEST_CASE("config hash is deterministic and sensitive to every entry") {
    const std::map<std::string, double> a{{"x", 1.0}, {"y", 2.0}};
    auto b = a;
    CHECK(config_hash(a) == config_hash(b));
    b["y"] = std::nextafter(2.0, 3.0);
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("document invariants are enforced on parse") {
    auto d = sample_document();
    d.singular_points[0].parameters = {1e9};
    CHECK_THROWS_MATCHES(parse_document(dump(d)), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::ParseError; }));
    auto e = sample_document();
    std::swap(e.samples[0], e.samples[1]);
    CHECK_THROWS_AS(parse_document(dump(e)), Error);
    CHECK_THROWS_AS(parse_document("{not json"), Error);
    CHECK_THROWS_AS(parse_document(R"({"schema_version":"1.0"})"), Error);
}

TEST_CASE("CSV uses '.' regardless of locale") {
    Trajectory tr;
    tr.samples = {{0.5, {1.25, -2.5}}, {1.0, {3.0, 4.0}}};
    const char* old = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = old ? old : "C";
    std::setlocale(LC_NUMERIC, "de_DE.UTF-8");  // may be unavailable; then this is a plain check
    const std::string csv = io::samples_csv(tr);
    std::setlocale(LC_NUMERIC, saved.c_str());
    CHECK(csv == "t,x,y\n0.5,1.25,-2.5\n1,3,4\n");
}

TEST_CASE("region CSV header") {
    RegionIIEstimate e;
    e.alpha = 0.1;
    e.delta1 = 0.0014;
    e.delta2 = 0.0632;
    const std::string csv = io::region_csv({e});
    CHECK(csv.rfind(io::kRegionCsvHeader, 0) == 0);
    CHECK(count(csv, "\n") == 2);
}

TEST_CASE("SVG has one polyline per trajectory and one marker per singular point") {
    const auto c = curves::nodal_cubic();
    const auto rep = detect_singularities_report(c, c.t_min, c.t_max);
    std::vector<Trajectory> trajs{rep.trajectory, rep.trajectory, rep.trajectory};
    std::vector<SingularPoint> pts = rep.points;
    SingularPoint cusp;
    cusp.kind = SingularKind::cusp;
    cusp.parameters = {0.0};
    pts.push_back(cusp);
    const std::string svg = io::portrait_svg(trajs, pts);
    CHECK(count(svg, "<polyline") == 3);
    CHECK(count(svg, "class=\"marker") == pts.size());
    CHECK(count(svg, "<rect class=\"marker cusp\"") == 1);
    CHECK(svg.find(',') != std::string::npos);
    CHECK(svg.rfind("<svg", 0) == 0);
}
