#pragma once

#include <stdexcept>
#include <string>

namespace hfp {

enum class ErrorCode {
    BadShape,
    IndexBudgetExceeded,
    DegenerateGenerator,
    NotCoprime,
    NoIntersection,
    NoUniqueIntersection,
    NoConvergence,
    SvdFailure,
    IllConditionedPencil,
    IllConditionedVandermonde,
    ConfigError,
    ParseError,
};

/// Failures split into two families: bad inputs/configuration, and numerical
/// breakdowns. The CLI maps them to distinct exit codes.
enum class ErrorFamily { Data, Numerical };

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::IndexBudgetExceeded: return "IndexBudgetExceeded";
    case ErrorCode::DegenerateGenerator: return "DegenerateGenerator";
    case ErrorCode::NotCoprime: return "NotCoprime";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::NoUniqueIntersection: return "NoUniqueIntersection";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SvdFailure: return "SvdFailure";
    case ErrorCode::IllConditionedPencil: return "IllConditionedPencil";
    case ErrorCode::IllConditionedVandermonde: return "IllConditionedVandermonde";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

inline ErrorFamily family_of(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NoConvergence:
    case ErrorCode::SvdFailure:
    case ErrorCode::IllConditionedPencil:
    case ErrorCode::IllConditionedVandermonde:
    case ErrorCode::DegenerateGenerator:
    case ErrorCode::NoIntersection:
    case ErrorCode::NoUniqueIntersection: return ErrorFamily::Numerical;
    default: return ErrorFamily::Data;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] ErrorFamily family() const noexcept { return family_of(code_); }

private:
    ErrorCode code_;
};

} // namespace hfp
