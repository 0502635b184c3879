#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kkm {

enum class ErrorCode {
    NonFiniteInput,
    NormalizationViolated,
    IndexOutOfRange,
    SpectralFailure,
    InvalidDecayParams,
    InvalidArgument,
    EmptyCluster,
    InstanceTooLarge,
    KTooLarge,
    MTooLarge,
    InvalidDelta,
    MissingXi,
    NormViolation,
    NotDivisible,
    EnumerationTooLarge,
    InvalidLogArgument,
    CoefficientDimensionMismatch,
    NonPositiveRisk,
    Config,
    Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and tests) can branch on the condition rather than the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kkm
