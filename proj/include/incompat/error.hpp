#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace incompat {

enum class ErrorCode {
    DegenerateMap,
    InvalidMetric,
    BadTriangle,
    BoundaryVertex,
    InvalidMesh,
    ConnectivityMismatch,
    EmptySequence,
    BadParams,
    NotAStrip,
    NotClosed,
    NonDifferentiable,
    LineSearchFailed,
    ClosedSurface,
    ParseError,
    IoError,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateMap:        return "DegenerateMap";
        case ErrorCode::InvalidMetric:        return "InvalidMetric";
        case ErrorCode::BadTriangle:          return "BadTriangle";
        case ErrorCode::BoundaryVertex:       return "BoundaryVertex";
        case ErrorCode::InvalidMesh:          return "InvalidMesh";
        case ErrorCode::ConnectivityMismatch: return "ConnectivityMismatch";
        case ErrorCode::EmptySequence:        return "EmptySequence";
        case ErrorCode::BadParams:            return "BadParams";
        case ErrorCode::NotAStrip:            return "NotAStrip";
        case ErrorCode::NotClosed:            return "NotClosed";
        case ErrorCode::NonDifferentiable:    return "NonDifferentiable";
        case ErrorCode::LineSearchFailed:     return "LineSearchFailed";
        case ErrorCode::ClosedSurface:        return "ClosedSurface";
        case ErrorCode::ParseError:           return "ParseError";
        case ErrorCode::IoError:              return "IoError";
    }
    return "Unknown";
}

// Every domain failure in the library is reported through this type; the
// code identifies the failure class, the message carries the detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), m_code(code) {}

    ErrorCode code() const { return m_code; }
    std::string_view name() const { return error_name(m_code); }

private:
    ErrorCode m_code;
};

} // namespace incompat
