#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracdyn {

/// Failure categories raised by the library. The name of each code is part of
/// the external interface: the CLI and the HTTP service report it verbatim.
enum class ErrorCode {
    NonConvergence,
    DomainError,
    RangeError,
    ContourThroughZero,
    NewtonDivergence,
    SingularTransform,
    BudgetExceeded,
    QuadratureFailure,
    DegreeTooLarge,
    IllConditionedRoots,
    InsufficientRange,
    NoBracket,
    DegenerateTangent,
    NoSingularityAtBoundary,
    BracketFailure,
    Blowup,
    InvalidStep,
    UsageError,
    ParseError,
};

[[nodiscard]] constexpr std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::RangeError: return "RangeError";
        case ErrorCode::ContourThroughZero: return "ContourThroughZero";
        case ErrorCode::NewtonDivergence: return "NewtonDivergence";
        case ErrorCode::SingularTransform: return "SingularTransform";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::DegreeTooLarge: return "DegreeTooLarge";
        case ErrorCode::IllConditionedRoots: return "IllConditionedRoots";
        case ErrorCode::InsufficientRange: return "InsufficientRange";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::DegenerateTangent: return "DegenerateTangent";
        case ErrorCode::NoSingularityAtBoundary: return "NoSingularityAtBoundary";
        case ErrorCode::BracketFailure: return "BracketFailure";
        case ErrorCode::Blowup: return "Blowup";
        case ErrorCode::InvalidStep: return "InvalidStep";
        case ErrorCode::UsageError: return "UsageError";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code), message_(message) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::string_view name() const noexcept { return error_name(code_); }
    /// The message without the "Name: " prefix that what() carries.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace fracdyn
