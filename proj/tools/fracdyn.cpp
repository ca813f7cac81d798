// fracdyn command-line front end. Exit codes: 0 ok, 1 domain error, 2 usage error.

#include "fracdyn/fracdyn.hpp"
#include "fracdyn/service.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace fracdyn;

namespace {

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::UsageError, "cannot open '" + path + "' for writing");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

Eigen::Matrix2d matrix2(const std::vector<double>& v) {
    if (v.size() != 4) throw Error(ErrorCode::UsageError, "--matrix needs 4 values a,b,c,d (row-major)");
    Eigen::Matrix2d A;
    A << v[0], v[1], v[2], v[3];
    return A;
}

std::vector<std::vector<double>> rows(const Eigen::MatrixXd& A) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(A.rows()));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(A(i, j));
    }
    return out;
}

Point2 point2(const std::vector<double>& v, const char* flag) {
    if (v.size() != 2) throw Error(ErrorCode::UsageError, std::string(flag) + " needs two values x,y");
    return {v[0], v[1]};
}

SamplingPolicy policy_for(int n) {
    if (n < 0) throw Error(ErrorCode::UsageError, "--n must be >= 0");
    if (n == 0) return AdaptiveSampling{};
    return UniformSampling{n};
}

std::map<std::string, double> sampling_config(const SamplingPolicy& p, double t_start, double t_end) {
    std::map<std::string, double> c{{"t_start", t_start}, {"t_max", t_end}};
    if (const auto* u = std::get_if<UniformSampling>(&p)) {
        c["n"] = u->n;
    } else {
        const auto& a = std::get<AdaptiveSampling>(p);
        c["n"] = 0;
        c["max_turn_angle"] = a.max_turn_angle;
        c["min_dt"] = a.min_dt;
        c["max_points"] = a.max_points;
        c["noise_rel"] = a.noise_rel;
    }
    return c;
}

/// Keeps samples inside the box |x|, |y| <= extent; the first sample outside is
/// replaced by the crossing of the box edge.
Trajectory clip(Trajectory tr, double extent) {
    const auto inside = [&](const State& s) { return std::abs(s[0]) <= extent && std::abs(s[1]) <= extent; };
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        if (inside(tr.samples[i].state)) continue;
        const State& a = tr.samples[i - 1].state;
        const State& b = tr.samples[i].state;
        double f = 1.0;
        for (int k = 0; k < 2; ++k) {
            if (std::abs(b[k]) > extent) f = std::min(f, (std::copysign(extent, b[k]) - a[k]) / (b[k] - a[k]));
        }
        const double t = tr.samples[i - 1].t + f * (tr.samples[i].t - tr.samples[i - 1].t);
        tr.samples[i] = {t, {a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])}};
        tr.samples.resize(i + 1);
        break;
    }
    return tr;
}

void print_points(const std::vector<SingularPoint>& pts) {
    std::printf("%zu singular point(s)\n", pts.size());
    for (const auto& p : pts) {
        std::printf("  %-8s x=%s y=%s t=", std::string(to_string(p.kind)).c_str(), io::fmt(p.location[0], 10).c_str(),
                    io::fmt(p.location[1], 10).c_str());
        for (std::size_t i = 0; i < p.parameters.size(); ++i) {
            std::printf("%s%s", i ? "," : "", io::fmt(p.parameters[i], 10).c_str());
        }
        if (p.tangent_jump) std::printf(" jump=%s", io::fmt(*p.tangent_jump, 6).c_str());
        std::printf("\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional-order linear systems: Mittag-Leffler evaluation, stability, singular points"};
    app.require_subcommand(1);

    // mlf eval
    auto* mlf = app.add_subcommand("mlf", "Mittag-Leffler function");
    mlf->require_subcommand(1);
    auto* mlf_eval = mlf->add_subcommand("eval", "Evaluate E_{alpha,beta}(z)");
    double ml_alpha = 0.5, ml_beta = 1.0, z_re = 0.0, z_im = 0.0;
    int ml_k = 0;
    mlf_eval->add_option("--alpha", ml_alpha, "alpha in (0, 2]")->required();
    mlf_eval->add_option("--beta", ml_beta, "beta")->capture_default_str();
    mlf_eval->add_option("--z", z_re, "Re z")->required();
    mlf_eval->add_option("--zi", z_im, "Im z")->capture_default_str();
    mlf_eval->add_option("--deriv", ml_k, "derivative order k")->capture_default_str();

    // solve
    auto* solve = app.add_subcommand("solve", "Sample a planar linear trajectory to JSON");
    double s_alpha = 0.5, s_r = 1.0, s_tstart = 0.0, s_tmax = 50.0;
    std::optional<double> s_theta, s_eps;
    std::vector<double> s_matrix, s_x0{1.0, 0.0};
    int s_n = 0;
    std::string s_out, s_csv;
    solve->add_option("--alpha", s_alpha, "order in (0, 1]")->required();
    solve->add_option("--r", s_r, "eigenvalue modulus")->capture_default_str();
    auto* s_theta_opt = solve->add_option("--theta", s_theta, "eigenvalue argument");
    solve->add_option("--epsilon", s_eps, "theta - alpha*pi/2")->excludes(s_theta_opt);
    solve->add_option("--matrix", s_matrix, "a,b,c,d (row-major) instead of r/theta")->delimiter(',')->expected(4);
    solve->add_option("--x0", s_x0, "initial state x,y")->delimiter(',')->expected(2);
    solve->add_option("--tstart", s_tstart)->capture_default_str();
    solve->add_option("--tmax", s_tmax)->capture_default_str();
    solve->add_option("--n", s_n, "uniform sample count, 0 = adaptive")->capture_default_str();
    solve->add_option("--out", s_out, "JSON output (default stdout)");
    solve->add_option("--csv", s_csv, "also write samples as CSV");

    // classify
    auto* classify = app.add_subcommand("classify", "Stability classification");
    double c_alpha = 0.5, c_re = 0.0, c_im = 0.0;
    std::vector<double> c_matrix;
    std::vector<std::string> c_orders;
    classify->add_option("--alpha", c_alpha, "commensurate order");
    auto* c_re_opt = classify->add_option("--re", c_re, "eigenvalue real part");
    classify->add_option("--im", c_im, "eigenvalue imaginary part");
    classify->add_option("--matrix", c_matrix, "row-major matrix")->delimiter(',');
    classify->add_option("--orders", c_orders, "incommensurate orders p/q,...")->delimiter(',');

    // portrait
    auto* portrait = app.add_subcommand("portrait", "Phase portrait (SVG + JSON)");
    double p_alpha = 0.5, p_tmax = 10.0, p_extent = 4.0, p_radius = 1.0;
    std::optional<double> p_l1, p_l2, p_re, p_im;
    std::vector<double> p_matrix;
    int p_ics = 12;
    std::string p_out, p_json;
    bool p_markers = false;
    portrait->add_option("--alpha", p_alpha, "order in (0, 1]")->required();
    portrait->add_option("--l1", p_l1, "first real eigenvalue (diagonal system)");
    portrait->add_option("--l2", p_l2, "second real eigenvalue");
    portrait->add_option("--re", p_re, "real part of a complex pair");
    portrait->add_option("--im", p_im, "imaginary part of a complex pair");
    portrait->add_option("--matrix", p_matrix, "a,b,c,d (row-major)")->delimiter(',')->expected(4);
    portrait->add_option("--ics", p_ics, "number of initial conditions on a circle")->capture_default_str();
    portrait->add_option("--radius", p_radius, "radius of that circle")->capture_default_str();
    portrait->add_option("--tmax", p_tmax)->capture_default_str();
    portrait->add_option("--extent", p_extent, "clip box half-width")->capture_default_str();
    portrait->add_option("--out", p_out, "SVG output")->required();
    portrait->add_option("--json", p_json, "JSON output");
    portrait->add_flag("--markers", p_markers, "detect and mark singular points");

    // singular
    auto* singular = app.add_subcommand("singular", "Detect cusps and self-intersections");
    double g_alpha = 0.5, g_r = 1.0, g_eps = 0.0, g_tstart = 0.5, g_tmax = 500.0;
    std::optional<double> g_theta;
    std::vector<double> g_x0{1.0, 0.0};
    std::string g_fixture, g_out, g_svg;
    int g_n = 0;
    singular->add_option("--alpha", g_alpha, "order in (0, 1)");
    singular->add_option("--r", g_r)->capture_default_str();
    auto* g_theta_opt = singular->add_option("--theta", g_theta, "eigenvalue argument");
    singular->add_option("--epsilon", g_eps, "theta - alpha*pi/2")->excludes(g_theta_opt);
    singular->add_option("--x0", g_x0)->delimiter(',')->expected(2);
    singular->add_option("--tstart", g_tstart)->capture_default_str();
    singular->add_option("--tmax", g_tmax)->capture_default_str();
    singular->add_option("--n", g_n, "uniform samples in the document, 0 = adaptive")->capture_default_str();
    singular->add_option("--fixture", g_fixture, "analytic test curve instead of a trajectory")
        ->check(CLI::IsMember(curves::fixture_names()));
    singular->add_option("--out", g_out, "TrajectoryDocument JSON");
    singular->add_option("--svg", g_svg, "annotated SVG");

    // region2
    auto* region2 = app.add_subcommand("region2", "Estimate the Region II band");
    std::vector<double> r_alpha;
    double r_r = 1.0, r_tmax = 500.0;
    std::string r_format = "csv", r_out;
    bool r_log = false;
    region2->add_option("--alpha", r_alpha, "one or more orders in (0, 1)")->delimiter(',')->required();
    region2->add_option("--r", r_r)->capture_default_str();
    region2->add_option("--tmax", r_tmax)->capture_default_str();
    region2->add_option("--format", r_format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    region2->add_option("--out", r_out);
    region2->add_flag("--log", r_log, "include the probe log (json)");

    // fde
    auto* fde = app.add_subcommand("fde", "Predictor-corrector solve");
    std::vector<double> f_orders{0.9, 0.9}, f_x0{0.2, 0.0}, f_matrix;
    std::string f_system = "quadratic", f_out, f_csv, f_svg;
    double f_h = 0.01, f_tend = 100.0;
    int f_iters = 2;
    bool f_detect = false;
    fde->add_option("--orders", f_orders)->delimiter(',')->capture_default_str();
    fde->add_option("--system", f_system, "quadratic (x'=x^2-y, y'=x) or linear")
        ->check(CLI::IsMember({"quadratic", "linear"}))
        ->capture_default_str();
    fde->add_option("--matrix", f_matrix, "row-major matrix for --system linear")->delimiter(',');
    fde->add_option("--x0", f_x0)->delimiter(',')->capture_default_str();
    fde->add_option("--step", f_h, "step size h")->capture_default_str();
    fde->add_option("--tend", f_tend)->capture_default_str();
    fde->add_option("--corrector-iters", f_iters)->capture_default_str();
    fde->add_flag("--detect", f_detect, "detect singular points (planar systems)");
    fde->add_option("--out", f_out, "TrajectoryDocument JSON");
    fde->add_option("--csv", f_csv, "samples CSV");
    fde->add_option("--svg", f_svg, "SVG of the trajectory");

    // serve
    auto* serve = app.add_subcommand("serve", "Start the HTTP service");
    int v_port = 8080;
    std::string v_bind = "127.0.0.1", v_origin = "*";
    serve->add_option("--port", v_port)->capture_default_str();
    serve->add_option("--bind", v_bind)->capture_default_str();
    serve->add_option("--cors-origin", v_origin)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*mlf_eval) {
            MLParams p = MLParams::with(ml_alpha, ml_beta);
            const Complex z(z_re, z_im);
            const Complex v = ml_k == 0 ? ml2(p, z) : ml_deriv(p, ml_k, z);
            if (v.imag() == 0.0) {
                std::printf("%s\n", io::fmt(v.real()).c_str());
            } else {
                std::printf("%s %s\n", io::fmt(v.real()).c_str(), io::fmt(v.imag()).c_str());
            }
        } else if (*solve) {
            TrajectoryDocument doc;
            doc.alpha = s_alpha;
            doc.x0 = s_x0;
            const SamplingPolicy pol = policy_for(s_n);
            Trajectory tr;
            if (!s_matrix.empty()) {
                if (s_theta || s_eps) throw Error(ErrorCode::UsageError, "--matrix excludes --theta/--epsilon");
                const Eigen::Matrix2d A = matrix2(s_matrix);
                tr = sample_trajectory(system_from_matrix(s_alpha, A, s_x0), s_tstart, s_tmax, pol);
                doc.matrix = rows(A);
            } else {
                const double theta = s_theta ? *s_theta : s_alpha * std::numbers::pi / 2.0 + s_eps.value_or(0.0);
                tr = sample_parametric(MLCurve{s_alpha, s_r, theta, point2(s_x0, "--x0")}, s_tstart, s_tmax, pol);
                doc.eigenvalue = PolarEigenvalue{s_r, theta};
                doc.region = service::region_info(s_alpha, std::polar(s_r, theta));
            }
            doc.samples = tr.samples;
            doc.provenance = make_provenance(sampling_config(pol, s_tstart, s_tmax));
            write_output(s_out, dump(doc, 2));
            if (!s_csv.empty()) write_output(s_csv, io::samples_csv(tr));
        } else if (*classify) {
            Json out;
            if (!c_orders.empty()) {
                IncommensurateSpec spec;
                for (const std::string& o : c_orders) {
                    Rational q;
                    const auto slash = o.find('/');
                    try {
                        q.num = std::stol(o.substr(0, slash));
                        q.den = slash == std::string::npos ? 1 : std::stol(o.substr(slash + 1));
                    } catch (const std::exception&) {
                        throw Error(ErrorCode::UsageError, "--orders entry '" + o + "' is not p/q");
                    }
                    spec.orders.push_back(q);
                }
                const auto n = static_cast<Eigen::Index>(spec.orders.size());
                if (static_cast<Eigen::Index>(c_matrix.size()) != n * n) {
                    throw Error(ErrorCode::UsageError, "--matrix must hold n*n values for n orders");
                }
                spec.jacobian = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    c_matrix.data(), n, n);
                const auto res = classify_incommensurate(spec);
                Json roots = Json::array();
                for (const Complex& z : res.roots) roots.push_back({{"re", z.real()}, {"im", z.imag()}, {"arg", std::arg(z)}});
                out = {{"M", res.M},
                       {"characteristic", res.characteristic},
                       {"roots", roots},
                       {"threshold_angle", res.threshold_angle},
                       {"stable", res.stable}};
            } else if (!c_matrix.empty()) {
                const auto sc = classify_system(system_from_matrix(c_alpha, matrix2(c_matrix), {1.0, 0.0}));
                Json eig = Json::array();
                for (const auto& e : sc.eigenvalues) eig.push_back(service::classification_json(e));
                out = {{"alpha", c_alpha}, {"verdict", std::string(to_string(sc.verdict))}, {"eigenvalues", eig}};
                if (sc.portrait) out["portrait"] = std::string(to_string(*sc.portrait));
            } else {
                if (!*c_re_opt) throw Error(ErrorCode::UsageError, "classify needs --re/--im, --matrix or --orders");
                out = service::classification_json(classify_eigenvalue(c_alpha, Complex(c_re, c_im)));
            }
            write_output("", out.dump(2));
        } else if (*portrait) {
            Eigen::Matrix2d A;
            if (!p_matrix.empty()) {
                A = matrix2(p_matrix);
            } else if (p_l1 && p_l2) {
                A << *p_l1, 0.0, 0.0, *p_l2;
            } else if (p_re && p_im) {
                A << *p_re, *p_im, -*p_im, *p_re;
            } else {
                throw Error(ErrorCode::UsageError, "portrait needs --l1/--l2, --re/--im or --matrix");
            }
            if (p_ics < 1) throw Error(ErrorCode::UsageError, "--ics must be >= 1");
            if (!(p_extent > p_radius)) throw Error(ErrorCode::UsageError, "--extent must exceed --radius");
            std::vector<Trajectory> trajs;
            std::vector<SingularPoint> marks;
            Json docs = Json::array();
            for (int k = 0; k < p_ics; ++k) {
                const double phi = 2.0 * std::numbers::pi * (k + 0.5) / p_ics;
                const State x0{p_radius * std::cos(phi), p_radius * std::sin(phi)};
                const auto sys = system_from_matrix(p_alpha, A, x0);
                Trajectory tr = clip(sample_trajectory(sys, 0.0, p_tmax, AdaptiveSampling{}), p_extent);
                TrajectoryDocument doc;
                doc.alpha = p_alpha;
                doc.matrix = rows(A);
                doc.x0 = x0;
                doc.samples = tr.samples;
                if (p_markers && tr.samples.size() >= 4) {
                    doc.singular_points = detect_singularities(SampledCurve{tr}, tr.t_front(), tr.t_back());
                    marks.insert(marks.end(), doc.singular_points.begin(), doc.singular_points.end());
                }
                auto cfg = sampling_config(AdaptiveSampling{}, 0.0, p_tmax);
                cfg["extent"] = p_extent;
                doc.provenance = make_provenance(cfg);
                docs.push_back(to_json(doc));
                trajs.push_back(std::move(tr));
            }
            io::SvgOptions so;
            so.title = "alpha = " + io::fmt(p_alpha);
            write_output(p_out, io::portrait_svg(trajs, marks, so));
            if (!p_json.empty()) write_output(p_json, Json{{"trajectories", docs}}.dump(2));
        } else if (*singular) {
            if (!g_fixture.empty()) {
                const AnalyticCurve c = curves::fixture(g_fixture);
                const auto rep = detect_singularities_report(c, c.t_min, c.t_max);
                print_points(rep.points);
                for (const auto& cp : rep.critical) {
                    std::printf("  critical t=%s speed=%s jump=%s%s\n", io::fmt(cp.t0, 8).c_str(),
                                io::fmt(cp.speed, 3).c_str(), io::fmt(cp.jump.angle, 6).c_str(),
                                cp.reducible ? " reducible" : "");
                }
                if (!g_svg.empty()) write_output(g_svg, io::portrait_svg({rep.trajectory}, rep.points));
            } else {
                service::TrajectoryRequest q;
                q.alpha = g_alpha;
                q.r = g_r;
                q.epsilon = g_theta ? *g_theta - g_alpha * std::numbers::pi / 2.0 : g_eps;
                q.t_start = g_tstart;
                q.t_max = g_tmax;
                q.n = g_n;
                q.x0 = point2(g_x0, "--x0");
                const TrajectoryDocument doc = service::ml_trajectory_document(q);
                print_points(doc.singular_points);
                if (!g_out.empty()) write_output(g_out, dump(doc, 2));
                if (!g_svg.empty()) {
                    Trajectory tr;
                    tr.samples = doc.samples;
                    write_output(g_svg, io::portrait_svg({tr}, doc.singular_points));
                }
            }
        } else if (*region2) {
            RegionDetection det;
            det.t_max = r_tmax;
            std::vector<RegionIIEstimate> ests;
            for (double a : r_alpha) {
                ests.push_back(estimate_deltas(a, r_r, det));
                std::fprintf(stderr, "alpha=%s delta1=%s delta2=%s (%zu probes)\n", io::fmt(a).c_str(),
                             io::fmt(ests.back().delta1, 6).c_str(), io::fmt(ests.back().delta2, 6).c_str(),
                             ests.back().log.size());
            }
            if (r_format == "csv") {
                write_output(r_out, io::region_csv(ests));
            } else {
                Json arr = Json::array();
                for (const auto& e : ests) arr.push_back(service::region2_json(e, r_log));
                write_output(r_out, arr.dump(2));
            }
        } else if (*fde) {
            FDESystemSpec spec;
            spec.orders = f_orders;
            spec.x0 = f_x0;
            spec.h = f_h;
            spec.t_end = f_tend;
            spec.corrector_iters = f_iters;
            std::optional<Eigen::MatrixXd> J;
            if (f_system == "quadratic") {
                spec.field = quadratic_field();
            } else {
                const auto n = static_cast<Eigen::Index>(f_x0.size());
                if (static_cast<Eigen::Index>(f_matrix.size()) != n * n) {
                    throw Error(ErrorCode::UsageError, "--matrix must hold n*n values for an n-dimensional --x0");
                }
                J = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    f_matrix.data(), n, n);
                spec.field = [A = *J](double, const State& x) {
                    const Eigen::VectorXd y = A * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
                    return State(y.data(), y.data() + y.size());
                };
            }
            const Trajectory tr = solve_pc(spec);
            TrajectoryDocument doc;
            doc.alpha = f_orders.front();
            if (J) doc.matrix = rows(*J);
            doc.x0 = f_x0;
            doc.samples = tr.samples;
            if (f_detect && f_x0.size() == 2) {
                doc.singular_points = detect_singularities(SampledCurve{tr}, tr.t_front(), tr.t_back());
                print_points(doc.singular_points);
            }
            std::map<std::string, double> cfg{{"h", f_h}, {"t_end", f_tend}, {"corrector_iters", f_iters}};
            for (std::size_t i = 0; i < f_orders.size(); ++i) cfg["order_" + std::to_string(i)] = f_orders[i];
            doc.provenance = make_provenance(cfg);
            if (!f_out.empty()) write_output(f_out, dump(doc, 2));
            if (!f_csv.empty()) write_output(f_csv, io::samples_csv(tr));
            if (!f_svg.empty()) write_output(f_svg, io::portrait_svg({tr}, doc.singular_points));
            if (f_out.empty() && f_csv.empty() && f_svg.empty() && !f_detect) write_output("", dump(doc, 2));
        } else if (*serve) {
            httplib::Server srv;
            service::ServerOptions so;
            so.cors_origin = v_origin;
            service::install_routes(srv, so);
            std::fprintf(stderr, "listening on http://%s:%d\n", v_bind.c_str(), v_port);
            if (!srv.listen(v_bind, v_port)) {
                throw Error(ErrorCode::DomainError, "cannot listen on " + v_bind + ":" + std::to_string(v_port));
            }
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code() == ErrorCode::UsageError ? 2 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
