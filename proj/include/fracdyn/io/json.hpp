#pragma once

// TrajectoryDocument: the JSON exchange format shared by the CLI and the HTTP service.
// Doubles are written in nlohmann's shortest round-trip form, so parse(dump(x)) == x exactly.

#include "fracdyn/error.hpp"
#include "fracdyn/singular.hpp"
#include "fracdyn/trajectory.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracdyn {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kLibraryVersion = "0.3.0";

struct PolarEigenvalue {
    double r = 1.0;
    double theta = 0.0;
    bool operator==(const PolarEigenvalue&) const = default;
};

struct RegionInfo {
    std::string name;  ///< "I", "II", "III" or "" when not classified
    std::optional<double> delta1;
    std::optional<double> delta2;
    bool operator==(const RegionInfo&) const = default;
};

struct Provenance {
    std::map<std::string, std::string> modules;
    /// Every tolerance and window that influenced the result, by name.
    std::map<std::string, double> config;
    std::string config_hash;
    bool operator==(const Provenance&) const = default;
};

struct TrajectoryDocument {
    std::string schema_version = kSchemaVersion;
    double alpha = 0.5;
    std::optional<PolarEigenvalue> eigenvalue;
    std::optional<std::vector<std::vector<double>>> matrix;
    State x0;
    std::vector<Sample> samples;
    std::vector<SingularPoint> singular_points;
    RegionInfo region;
    Provenance provenance;
};

/// FNV-1a over the canonical (key-sorted) dump of the config map.
[[nodiscard]] inline std::string config_hash(const std::map<std::string, double>& config) {
    const std::string canon = Json(config).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

[[nodiscard]] inline Provenance make_provenance(std::map<std::string, double> config) {
    Provenance p;
    p.modules = {{"fracdyn", kLibraryVersion}, {"schema", kSchemaVersion}};
    p.config_hash = config_hash(config);
    p.config = std::move(config);
    return p;
}

// ---------------------------------------------------------------------------
// to JSON

[[nodiscard]] inline Json to_json(const SingularPoint& p) {
    Json j{{"kind", std::string(to_string(p.kind))},
           {"x", p.location[0]},
           {"y", p.location[1]},
           {"params", p.parameters}};
    if (p.tangent_jump) j["tangent_jump"] = *p.tangent_jump;
    if (p.speed_min) j["speed_min"] = *p.speed_min;
    if (p.reducible_flag) j["reducible"] = true;
    return j;
}

[[nodiscard]] inline Json samples_to_json(const std::vector<Sample>& samples) {
    Json arr = Json::array();
    for (const Sample& s : samples) {
        if (s.state.size() == 2) {
            arr.push_back({{"t", s.t}, {"x", s.state[0]}, {"y", s.state[1]}});
        } else {
            arr.push_back({{"t", s.t}, {"state", s.state}});
        }
    }
    return arr;
}

[[nodiscard]] inline Json to_json(const TrajectoryDocument& d) {
    Json j;
    j["schema_version"] = d.schema_version;
    j["alpha"] = d.alpha;
    if (d.eigenvalue) j["eigenvalue"] = {{"r", d.eigenvalue->r}, {"theta", d.eigenvalue->theta}};
    if (d.matrix) j["matrix"] = *d.matrix;
    j["x0"] = d.x0;
    j["samples"] = samples_to_json(d.samples);
    Json sp = Json::array();
    for (const auto& p : d.singular_points) sp.push_back(to_json(p));
    j["singular_points"] = sp;
    Json region{{"name", d.region.name}};
    if (d.region.delta1) region["delta1"] = *d.region.delta1;
    if (d.region.delta2) region["delta2"] = *d.region.delta2;
    j["region"] = region;
    j["provenance"] = {{"modules", d.provenance.modules},
                       {"config", d.provenance.config},
                       {"config_hash", d.provenance.config_hash}};
    return j;
}

[[nodiscard]] inline std::string dump(const TrajectoryDocument& d, int indent = -1) { return to_json(d).dump(indent); }

// ---------------------------------------------------------------------------
// from JSON

namespace detail {

template <class F>
auto parse_guard(F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

}  // namespace detail

[[nodiscard]] inline SingularPoint singular_from_json(const Json& j) {
    return detail::parse_guard([&] {
        SingularPoint p;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "cusp") {
            p.kind = SingularKind::cusp;
        } else if (kind == "double") {
            p.kind = SingularKind::double_point;
        } else if (kind == "multiple") {
            p.kind = SingularKind::multiple_point;
        } else {
            throw Error(ErrorCode::ParseError, "unknown singular point kind '" + kind + "'");
        }
        p.location = {j.at("x").get<double>(), j.at("y").get<double>()};
        p.parameters = j.at("params").get<std::vector<double>>();
        if (j.contains("tangent_jump")) p.tangent_jump = j.at("tangent_jump").get<double>();
        if (j.contains("speed_min")) p.speed_min = j.at("speed_min").get<double>();
        p.reducible_flag = j.value("reducible", false);
        return p;
    });
}

/// Checks the document invariants: samples ordered by t, singular parameters inside the sampled range.
inline void validate_document(const TrajectoryDocument& d) {
    for (std::size_t i = 1; i < d.samples.size(); ++i) {
        require(d.samples[i - 1].t < d.samples[i].t, ErrorCode::ParseError, "samples must be ordered by t");
    }
    if (d.samples.empty()) {
        require(d.singular_points.empty(), ErrorCode::ParseError, "singular points without samples");
        return;
    }
    const double lo = d.samples.front().t;
    const double hi = d.samples.back().t;
    for (const auto& p : d.singular_points) {
        for (double t : p.parameters) {
            require(t >= lo && t <= hi, ErrorCode::ParseError, "singular point parameter outside the sampled range");
        }
    }
}

[[nodiscard]] inline TrajectoryDocument document_from_json(const Json& j) {
    TrajectoryDocument d = detail::parse_guard([&] {
        TrajectoryDocument d;
        d.schema_version = j.at("schema_version").get<std::string>();
        d.alpha = j.at("alpha").get<double>();
        if (j.contains("eigenvalue")) {
            d.eigenvalue = PolarEigenvalue{j["eigenvalue"].at("r").get<double>(), j["eigenvalue"].at("theta").get<double>()};
        }
        if (j.contains("matrix")) d.matrix = j["matrix"].get<std::vector<std::vector<double>>>();
        d.x0 = j.at("x0").get<State>();
        for (const Json& s : j.at("samples")) {
            Sample smp;
            smp.t = s.at("t").get<double>();
            if (s.contains("state")) {
                smp.state = s["state"].get<State>();
            } else {
                smp.state = {s.at("x").get<double>(), s.at("y").get<double>()};
            }
            d.samples.push_back(std::move(smp));
        }
        for (const Json& p : j.at("singular_points")) d.singular_points.push_back(singular_from_json(p));
        const Json& r = j.at("region");
        d.region.name = r.at("name").get<std::string>();
        if (r.contains("delta1")) d.region.delta1 = r["delta1"].get<double>();
        if (r.contains("delta2")) d.region.delta2 = r["delta2"].get<double>();
        const Json& pv = j.at("provenance");
        d.provenance.modules = pv.at("modules").get<std::map<std::string, std::string>>();
        d.provenance.config = pv.at("config").get<std::map<std::string, double>>();
        d.provenance.config_hash = pv.at("config_hash").get<std::string>();
        return d;
    });
    validate_document(d);
    return d;
}

[[nodiscard]] inline TrajectoryDocument parse_document(const std::string& text) {
    const Json j = detail::parse_guard([&] { return Json::parse(text); });
    return document_from_json(j);
}

/// Field-by-field equality with exact double comparison.
[[nodiscard]] inline bool documents_equal(const TrajectoryDocument& a, const TrajectoryDocument& b) {
    const auto same_point = [](const SingularPoint& p, const SingularPoint& q) {
        return p.kind == q.kind && p.location == q.location && p.parameters == q.parameters &&
               p.tangent_jump == q.tangent_jump && p.speed_min == q.speed_min && p.reducible_flag == q.reducible_flag;
    };
    if (a.schema_version != b.schema_version || a.alpha != b.alpha || a.eigenvalue != b.eigenvalue ||
        a.matrix != b.matrix || a.x0 != b.x0 || !(a.region == b.region) || !(a.provenance == b.provenance) ||
        a.samples.size() != b.samples.size() || a.singular_points.size() != b.singular_points.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (a.samples[i].t != b.samples[i].t || a.samples[i].state != b.samples[i].state) return false;
    }
    for (std::size_t i = 0; i < a.singular_points.size(); ++i) {
        if (!same_point(a.singular_points[i], b.singular_points[i])) return false;
    }
    return true;
}

}  // namespace fracdyn
