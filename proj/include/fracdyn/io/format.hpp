#pragma once

#include <charconv>
#include <string>

namespace fracdyn::io {

/// Shortest round-trip decimal form, '.' separator regardless of locale.
[[nodiscard]] inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Fixed number of significant digits, locale independent.
[[nodiscard]] inline std::string fmt(double v, int digits) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
    return std::string(buf, res.ptr);
}

}  // namespace fracdyn::io
