#pragma once

#include <stdexcept>
#include <string>

namespace convamp {

/// Base class for all numerical failures raised by the toolkit.
/// The CLI maps these to exit code 2; anything else input-related is exit 1.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KernelRankMismatch : NumericalError {
    using NumericalError::NumericalError;
};
struct NoCriticalPoint : NumericalError {
    using NumericalError::NumericalError;
};
struct MultipleCriticalPoints : NumericalError {
    using NumericalError::NumericalError;
};
struct NonSimpleCritical : NumericalError {
    using NumericalError::NumericalError;
};
struct SingularComplement : NumericalError {
    using NumericalError::NumericalError;
};
struct SingularReducedBlock : NumericalError {
    using NumericalError::NumericalError;
};
struct NoConvergence : NumericalError {
    using NumericalError::NumericalError;
};
struct NegativeDoubleRoot : NumericalError {
    using NumericalError::NumericalError;
};
struct OutsideExistenceBand : NumericalError {
    using NumericalError::NumericalError;
};
struct NegativeAmplitude : NumericalError {
    using NumericalError::NumericalError;
};
struct DegenerateDenominator : NumericalError {
    using NumericalError::NumericalError;
};
struct SingularF : NumericalError {
    using NumericalError::NumericalError;
};
struct SlopeTooShallow : NumericalError {
    using NumericalError::NumericalError;
};
struct BlowupDetected : NumericalError {
    using NumericalError::NumericalError;
};
struct NonFiniteValue : NumericalError {
    using NumericalError::NumericalError;
};
struct NewtonDiverged : NumericalError {
    using NumericalError::NumericalError;
};
struct PredictorInvalid : NumericalError {
    using NumericalError::NumericalError;
};
struct BranchMatchingFailed : NumericalError {
    using NumericalError::NumericalError;
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace convamp
