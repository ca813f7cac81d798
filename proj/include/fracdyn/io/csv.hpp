#pragma once

// CSV dumps of trajectories and Region II tables.

#include "fracdyn/io/format.hpp"
#include "fracdyn/region2.hpp"
#include "fracdyn/trajectory.hpp"

#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fracdyn::io {

[[nodiscard]] inline std::string samples_csv(const Trajectory& traj) {
    std::ostringstream out;
    const std::size_t dim = traj.samples.empty() ? 0 : traj.samples.front().state.size();
    out << 't';
    if (dim == 2) {
        out << ",x,y";
    } else {
        for (std::size_t i = 0; i < dim; ++i) out << ",x" << i + 1;
    }
    out << '\n';
    for (const Sample& s : traj.samples) {
        out << fmt(s.t);
        for (double v : s.state) out << ',' << fmt(v);
        out << '\n';
    }
    return out.str();
}

inline constexpr const char* kRegionCsvHeader = "alpha,alpha_pi_2,delta1,delta2,theta_low,theta_high\n";

[[nodiscard]] inline std::string region_csv_row(const RegionIIEstimate& e) {
    std::ostringstream out;
    out << fmt(e.alpha) << ',' << fmt(e.alpha * std::numbers::pi / 2.0) << ',' << fmt(e.delta1) << ','
        << fmt(e.delta2) << ',' << fmt(e.theta_low) << ',' << fmt(e.theta_high) << '\n';
    return out.str();
}

[[nodiscard]] inline std::string region_csv(const std::vector<RegionIIEstimate>& rows) {
    std::string s = kRegionCsvHeader;
    for (const auto& r : rows) s += region_csv_row(r);
    return s;
}

}  // namespace fracdyn::io
