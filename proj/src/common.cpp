#include "toda/common.hpp"

namespace toda {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Validation: return "ValidationError";
        case ErrorKind::OffUnitCircle: return "OffUnitCircle";
        case ErrorKind::DegenerateCurve: return "DegenerateCurve";
        case ErrorKind::ContourError: return "ContourError";
        case ErrorKind::NormalizationError: return "NormalizationError";
        case ErrorKind::NoAdmissibleDivisor: return "NoAdmissibleDivisor";
        case ErrorKind::NearThetaZero: return "NearThetaZero";
        case ErrorKind::NotExact: return "NotExact";
        case ErrorKind::DegenerateMetric: return "DegenerateMetric";
        case ErrorKind::SpectralCollision: return "SpectralCollision";
        case ErrorKind::FrameDegenerate: return "FrameDegenerate";
        case ErrorKind::MaskedPath: return "MaskedPath";
        case ErrorKind::Tolerance: return "ToleranceExceeded";
    }
    return "Error";
}

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::Validation:
        case ErrorKind::OffUnitCircle: return 2;
        case ErrorKind::DegenerateCurve:
        case ErrorKind::NoAdmissibleDivisor:
        case ErrorKind::DegenerateMetric:
        case ErrorKind::SpectralCollision:
        case ErrorKind::FrameDegenerate: return 4;
        default: return 3;
    }
}

}  // namespace toda
