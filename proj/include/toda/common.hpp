#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace toda {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline const cplx kI(0.0, 1.0);

enum class ErrorKind {
    Validation,
    OffUnitCircle,
    DegenerateCurve,
    ContourError,
    NormalizationError,
    NoAdmissibleDivisor,
    NearThetaZero,
    NotExact,
    DegenerateMetric,
    SpectralCollision,
    FrameDegenerate,
    MaskedPath,
    Tolerance
};

const char* error_kind_name(ErrorKind k);

// CLI exit code for an error kind: 2 validation, 3 numerical, 4 degenerate input
int exit_code_for(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace toda
