#pragma once

// Stateless HTTP front end. Each route is a pure function from query parameters to
// (status, JSON body); make_server only wires them into httplib.

#include "fracdyn/error.hpp"
#include "fracdyn/io/format.hpp"
#include "fracdyn/io/json.hpp"
#include "fracdyn/region2.hpp"
#include "fracdyn/singular.hpp"
#include "fracdyn/stability.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <list>
#include <memory>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

namespace fracdyn::service {

using Params = std::multimap<std::string, std::string>;

struct Response {
    int status = 200;
    std::string body;
};

/// Raised for alpha outside the admissible range; mapped to 422.
struct AlphaOutOfRange : Error {
    explicit AlphaOutOfRange(double alpha)
        : Error(ErrorCode::DomainError, "alpha must lie in (0, 1), got " + io::fmt(alpha)) {}
};

[[nodiscard]] inline std::optional<std::string> param(const Params& p, const std::string& name) {
    const auto it = p.find(name);
    if (it == p.end()) return std::nullopt;
    return it->second;
}

[[nodiscard]] inline double parse_number(const std::string& name, const std::string& text) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    if (!text.empty() && *b == '+') ++b;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v)) {
        throw Error(ErrorCode::UsageError, "parameter '" + name + "' is not a finite number: '" + text + "'");
    }
    return v;
}

[[nodiscard]] inline double number(const Params& p, const std::string& name, std::optional<double> fallback = {}) {
    if (const auto v = param(p, name)) return parse_number(name, *v);
    if (fallback) return *fallback;
    throw Error(ErrorCode::UsageError, "missing parameter '" + name + "'");
}

inline double checked_alpha(const Params& p) {
    const double a = number(p, "alpha");
    if (!(a > 0.0 && a < 1.0)) throw AlphaOutOfRange(a);
    return a;
}

// ---------------------------------------------------------------------------
// Document builders (shared with the CLI)

struct TrajectoryRequest {
    double alpha = 0.5;
    double r = 1.0;
    double epsilon = 0.0;  ///< theta = alpha*pi/2 + epsilon
    double t_start = 0.5;
    double t_max = 500.0;
    int n = 0;  ///< uniform sample count for the returned curve; 0 = adaptive
    Point2 x0{1.0, 0.0};
    bool detect = true;
    DetectionConfig detection;

    [[nodiscard]] double theta() const { return alpha * std::numbers::pi / 2.0 + epsilon; }
};

[[nodiscard]] inline std::map<std::string, double> request_config(const TrajectoryRequest& q) {
    const auto& ad = std::get<AdaptiveSampling>(q.detection.sampling);
    const MLParams ml = MLParams::with(q.alpha, 1.0);
    return {
        {"t_start", q.t_start},
        {"t_max", q.t_max},
        {"n", static_cast<double>(q.n)},
        {"max_turn_angle", ad.max_turn_angle},
        {"min_dt", ad.min_dt},
        {"max_points", static_cast<double>(ad.max_points)},
        {"noise_rel", ad.noise_rel},
        {"merge_radius", q.detection.intersections.merge_radius},
        {"param_separation", q.detection.intersections.param_separation},
        {"refine_tol", q.detection.intersections.refine_tol},
        {"min_crossing_sin", q.detection.intersections.min_crossing_sin},
        {"arg_match_tol", q.detection.critical.arg_match_tol},
        {"zero_tol", q.detection.critical.zero_tol},
        {"speed_tol_rel", q.detection.critical.speed_tol_rel},
        {"cusp_angle_threshold", q.detection.cusp_angle_threshold},
        {"series_tol", ml.series_tol},
        {"quad_tol", ml.quad_tol},
        {"series_radius", ml.series_radius},
        {"switch_radius", ml.switch_radius},
        {"detect", q.detect ? 1.0 : 0.0},
    };
}

[[nodiscard]] inline RegionInfo region_info(double alpha, Complex lambda) {
    RegionInfo info;
    const auto c = classify_eigenvalue(alpha, lambda);
    info.name = c.in_region_ii ? "II" : (c.region == Sector::I ? "I" : "III");
    info.delta1 = c.deltas.delta1;
    info.delta2 = c.deltas.delta2;
    return info;
}

[[nodiscard]] inline TrajectoryDocument ml_trajectory_document(const TrajectoryRequest& q) {
    require(q.alpha > 0.0 && q.alpha <= 1.0, ErrorCode::DomainError, "alpha must lie in (0, 1]");
    require(q.r > 0.0, ErrorCode::DomainError, "r must be positive");
    require(q.t_start >= 0.0 && q.t_start < q.t_max, ErrorCode::DomainError, "need 0 <= tstart < tmax");
    require(q.n == 0 || q.n >= 2, ErrorCode::DomainError, "n must be 0 (adaptive) or >= 2");
    const double theta = q.theta();
    require(theta >= -std::numbers::pi && theta <= std::numbers::pi, ErrorCode::DomainError,
            "theta = alpha*pi/2 + epsilon must lie in [-pi, pi]");
    const ParametricCurve curve = MLCurve{q.alpha, q.r, theta, q.x0};

    TrajectoryDocument doc;
    doc.alpha = q.alpha;
    doc.eigenvalue = PolarEigenvalue{q.r, theta};
    doc.x0 = {q.x0[0], q.x0[1]};
    const SamplingPolicy policy = q.n > 0 ? SamplingPolicy{UniformSampling{q.n}} : q.detection.sampling;
    doc.samples = sample_parametric(curve, q.t_start, q.t_max, policy).samples;
    if (q.detect) doc.singular_points = detect_singularities(curve, q.t_start, q.t_max, q.detection);
    doc.region = region_info(q.alpha, std::polar(q.r, theta));
    doc.provenance = make_provenance(request_config(q));
    return doc;
}

[[nodiscard]] inline TrajectoryRequest trajectory_request(const Params& p) {
    TrajectoryRequest q;
    q.alpha = checked_alpha(p);
    q.r = number(p, "r", 1.0);
    q.epsilon = number(p, "epsilon", 0.0);
    q.t_start = number(p, "tstart", 0.5);
    q.t_max = number(p, "tmax", 500.0);
    const double n = number(p, "n", 0.0);
    require(n == std::floor(n) && n >= 0.0 && n <= 1e6, ErrorCode::DomainError, "n must be an integer in [0, 1e6]");
    q.n = static_cast<int>(n);
    q.x0 = {number(p, "x0", 1.0), number(p, "y0", 0.0)};
    return q;
}

[[nodiscard]] inline Json region2_json(const RegionIIEstimate& e, bool with_log) {
    Json j{{"alpha", e.alpha},
           {"r", e.r},
           {"alpha_pi_2", e.alpha * std::numbers::pi / 2.0},
           {"delta1", e.delta1},
           {"delta2", e.delta2},
           {"theta_low", e.theta_low},
           {"theta_high", e.theta_high},
           {"bisection_tol", e.bisection_tol},
           {"bisection_tol_low", e.bisection_tol_low},
           {"t_start", e.detection.t_start},
           {"t_max", e.detection.t_max}};
    if (with_log) {
        Json log = Json::array();
        for (const auto& p : e.log) log.push_back({{"theta", p.theta}, {"singular", p.singular}, {"phase", p.phase}});
        j["log"] = log;
    }
    return j;
}

[[nodiscard]] inline Json classification_json(const EigenClassification& c) {
    return {{"eigenvalue", {{"re", c.eigenvalue.real()}, {"im", c.eigenvalue.imag()}}},
            {"arg_abs", c.arg_abs},
            {"boundary_angle", c.boundary_angle},
            {"region", std::string(to_string(c.region))},
            {"in_region_ii", c.in_region_ii},
            {"delta1", c.deltas.delta1},
            {"delta2", c.deltas.delta2},
            {"stability", std::string(to_string(c.stability))},
            {"portrait", std::string(to_string(c.portrait))},
            {"decay_exponent", c.decay_exponent}};
}

// ---------------------------------------------------------------------------
// Routes

/// Bounded memo for /region2; hit and miss return the same bytes.
class RegionCache {
public:
    explicit RegionCache(std::size_t capacity = 32) : capacity_(capacity) {}

    template <class F>
    std::string get(const std::string& key, F&& compute) {
        {
            std::lock_guard lock(mu_);
            if (const auto it = map_.find(key); it != map_.end()) return it->second;
        }
        std::string value = compute();
        std::lock_guard lock(mu_);
        if (map_.emplace(key, value).second) {
            order_.push_back(key);
            if (order_.size() > capacity_) {
                map_.erase(order_.front());
                order_.pop_front();
            }
        }
        return value;
    }

private:
    std::size_t capacity_;
    std::mutex mu_;
    std::map<std::string, std::string> map_;
    std::list<std::string> order_;
};

[[nodiscard]] inline Response error_response(int status, std::string_view name, const std::string& message) {
    return {status, Json{{"error", std::string(name)}, {"message", message}}.dump()};
}

template <class F>
Response guarded(F&& f) {
    try {
        return {200, f()};
    } catch (const AlphaOutOfRange& e) {
        return error_response(422, e.name(), e.message());
    } catch (const Error& e) {
        return error_response(400, e.name(), e.message());
    } catch (const std::exception& e) {
        return error_response(500, "InternalError", e.what());
    }
}

[[nodiscard]] inline Response handle_trajectory(const Params& p) {
    return guarded([&] { return dump(ml_trajectory_document(trajectory_request(p))); });
}

[[nodiscard]] inline Response handle_singularities(const Params& p) {
    return guarded([&] {
        const TrajectoryDocument doc = ml_trajectory_document(trajectory_request(p));
        Json j = to_json(doc);
        j.erase("samples");
        return j.dump();
    });
}

[[nodiscard]] inline Response handle_region2(const Params& p, RegionCache* cache = nullptr) {
    return guarded([&] {
        const double alpha = checked_alpha(p);
        const double r = number(p, "r", 1.0);
        RegionDetection det;
        det.t_max = number(p, "tmax", det.t_max);
        const auto compute = [&] { return region2_json(estimate_deltas(alpha, r, det), true).dump(); };
        if (!cache) return compute();
        return cache->get(io::fmt(alpha) + "|" + io::fmt(r) + "|" + io::fmt(det.t_max), compute);
    });
}

[[nodiscard]] inline Response handle_classify(const Params& p) {
    return guarded([&] {
        const double alpha = checked_alpha(p);
        const Complex lambda(number(p, "re"), number(p, "im", 0.0));
        return classification_json(classify_eigenvalue(alpha, lambda)).dump();
    });
}

[[nodiscard]] inline Response handle_health() {
    return {200, Json{{"status", "ok"}, {"version", kLibraryVersion}, {"schema_version", kSchemaVersion}}.dump()};
}

struct ServerOptions {
    std::string cors_origin = "*";
    std::size_t region_cache = 32;
};

/// Registers all routes on a fresh server. The caller owns listen()/stop().
inline void install_routes(httplib::Server& srv, const ServerOptions& opt = {},
                           std::shared_ptr<RegionCache> cache = nullptr) {
    if (!cache) cache = std::make_shared<RegionCache>(opt.region_cache);
    const std::string origin = opt.cors_origin;
    const auto reply = [origin](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_content(r.body, "application/json");
    };
    const auto params = [](const httplib::Request& req) {
        Params p;
        for (const auto& [k, v] : req.params) p.emplace(k, v);
        return p;
    };
    srv.Get("/trajectory", [=](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_trajectory(params(req)));
    });
    srv.Get("/singularities", [=](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_singularities(params(req)));
    });
    srv.Get("/region2", [=](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_region2(params(req), cache.get()));
    });
    srv.Get("/classify", [=](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_classify(params(req)));
    });
    srv.Get("/health", [=](const httplib::Request&, httplib::Response& res) { reply(res, handle_health()); });
    srv.Options(R"(/.*)", [origin](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    srv.set_error_handler([origin](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_content(Json{{"error", "NotFound"}, {"message", "no such route"}}.dump(), "application/json");
    });
}

}  // namespace fracdyn::service
