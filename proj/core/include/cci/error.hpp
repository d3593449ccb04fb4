#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cci {

/// Failure categories raised by the library. The CLI maps the category
/// (not the kind) onto its exit code.
enum class ErrorKind {
    // validation
    InvalidArgument,
    ConfigError,
    UnknownVariable,
    TooShort,
    LengthMismatch,
    // data
    ParseError,
    GapError,
    EmptyOverlap,
    NonPositiveLevel,
    ZeroVariance,
    MissingTerm,
    DegenerateBenchmark,
    AllZero,
    TooFewReferenceObs,
    HttpError,
    AuthError,
    IoError,
    // numerical
    RankDeficient,
    SingularSigma,
    IrrelevantInstrument,
    UnstableDgp,
    NumericalFailure,
};

enum class ErrorCategory { Validation, Data, Numerical };

std::string_view to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] ErrorCategory category() const noexcept { return category_of(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace cci
