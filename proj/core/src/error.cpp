#include "cci/error.hpp"

namespace cci {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::UnknownVariable: return "UnknownVariable";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::GapError: return "GapError";
        case ErrorKind::EmptyOverlap: return "EmptyOverlap";
        case ErrorKind::NonPositiveLevel: return "NonPositiveLevel";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::MissingTerm: return "MissingTerm";
        case ErrorKind::DegenerateBenchmark: return "DegenerateBenchmark";
        case ErrorKind::AllZero: return "AllZero";
        case ErrorKind::TooFewReferenceObs: return "TooFewReferenceObs";
        case ErrorKind::HttpError: return "HttpError";
        case ErrorKind::AuthError: return "AuthError";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::SingularSigma: return "SingularSigma";
        case ErrorKind::IrrelevantInstrument: return "IrrelevantInstrument";
        case ErrorKind::UnstableDgp: return "UnstableDgp";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::ConfigError:
        case ErrorKind::UnknownVariable:
        case ErrorKind::TooShort:
        case ErrorKind::LengthMismatch:
            return ErrorCategory::Validation;
        case ErrorKind::RankDeficient:
        case ErrorKind::SingularSigma:
        case ErrorKind::IrrelevantInstrument:
        case ErrorKind::UnstableDgp:
        case ErrorKind::NumericalFailure:
            return ErrorCategory::Numerical;
        default:
            return ErrorCategory::Data;
    }
}

}  // namespace cci
