#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kdqlab {

enum class ErrorKind {
    NotHermitian,
    NonFinite,
    DimensionMismatch,
    InvalidParameter,
    InvalidP,
    InvalidVariant,
    InvalidPulse,
    GridTooSmall,
    NonUniformGrid,
    WOutOfRange,
    InvalidWindow,
    LengthMismatch,
    NonPositiveSigma,
    InvariantViolation,
    ParseError,
    ValidationError,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::InvalidP: return "InvalidP";
    case ErrorKind::InvalidVariant: return "InvalidVariant";
    case ErrorKind::InvalidPulse: return "InvalidPulse";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::NonUniformGrid: return "NonUniformGrid";
    case ErrorKind::WOutOfRange: return "WOutOfRange";
    case ErrorKind::InvalidWindow: return "InvalidWindow";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

} // namespace kdqlab
