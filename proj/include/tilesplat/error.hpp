// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tilesplat {

enum class ErrorCode {
    ZeroQuaternion,
    FormatError,
    NonFiniteParameter,
    NegativeDepth,
    UnsortedInput,
    DimensionMismatch,
    StaleAux,
    ShapeMismatch,
    BudgetViolation,
    BudgetExceeded,
    StaleHandle,
    DoubleFree,
    ZeroTotal,
    NestedStage,
    NegativeUnaccounted,
    TooFewSamples,
    InvalidOrder,
    IncompleteGrid,
    TooSmall,
    MissingFile,
    BadJson,
    ConfigError,
    IoError,
    NumericalFailure,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so callers
/// (and the CLI exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ZeroQuaternion: return "ZeroQuaternion";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::NegativeDepth: return "NegativeDepth";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::StaleAux: return "StaleAux";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BudgetViolation: return "BudgetViolation";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::StaleHandle: return "StaleHandle";
    case ErrorCode::DoubleFree: return "DoubleFree";
    case ErrorCode::ZeroTotal: return "ZeroTotal";
    case ErrorCode::NestedStage: return "NestedStage";
    case ErrorCode::NegativeUnaccounted: return "NegativeUnaccounted";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::IncompleteGrid: return "IncompleteGrid";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadJson: return "BadJson";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

} // namespace tilesplat
