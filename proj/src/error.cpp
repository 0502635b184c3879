#include "kkm/error.hpp"

namespace kkm {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::NormalizationViolated: return "NormalizationViolated";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::SpectralFailure: return "SpectralFailure";
        case ErrorCode::InvalidDecayParams: return "InvalidDecayParams";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyCluster: return "EmptyCluster";
        case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::MTooLarge: return "MTooLarge";
        case ErrorCode::InvalidDelta: return "InvalidDelta";
        case ErrorCode::MissingXi: return "MissingXi";
        case ErrorCode::NormViolation: return "NormViolation";
        case ErrorCode::NotDivisible: return "NotDivisible";
        case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
        case ErrorCode::InvalidLogArgument: return "InvalidLogArgument";
        case ErrorCode::CoefficientDimensionMismatch: return "CoefficientDimensionMismatch";
        case ErrorCode::NonPositiveRisk: return "NonPositiveRisk";
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace kkm
