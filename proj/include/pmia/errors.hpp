#ifndef PMIA_ERRORS_HPP
#define PMIA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pmia {

enum class ErrorCode {
    OutOfRange,
    InvalidArgument,
    SeriesDiverged,
    StepFailure,
    BracketNotFound,
    NonMonotoneClassification,
    InsufficientTail,
    DomainError,
    NegativeData,
    NewtonDiverged,
    ConfigError,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SeriesDiverged: return "SeriesDiverged";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::BracketNotFound: return "BracketNotFound";
        case ErrorCode::NonMonotoneClassification: return "NonMonotoneClassification";
        case ErrorCode::InsufficientTail: return "InsufficientTail";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::NegativeData: return "NegativeData";
        case ErrorCode::NewtonDiverged: return "NewtonDiverged";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace pmia

#endif
