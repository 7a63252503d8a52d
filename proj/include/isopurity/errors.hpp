#pragma once

#include <stdexcept>
#include <string>

namespace isopurity {

// Domain errors: the caller asked for something outside the contract.
// Numerical errors: the contract was honored but the computation failed.
// The CLI maps the former to exit code 2 and the latter to exit code 3.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct SpectrumInvalid : DomainError {
    using DomainError::DomainError;
};
struct SumOutOfTolerance : SpectrumInvalid {
    using SpectrumInvalid::SpectrumInvalid;
};
struct NegativeEigenvalue : SpectrumInvalid {
    using SpectrumInvalid::SpectrumInvalid;
};
struct InvalidDims : DomainError {
    using DomainError::DomainError;
};
struct BelowBetaMinus : DomainError {
    using DomainError::DomainError;
};
struct OutsideConvergence : DomainError {
    using DomainError::DomainError;
};
struct UnsupportedOrder : DomainError {
    using DomainError::DomainError;
};
struct TooFewSamples : DomainError {
    using DomainError::DomainError;
};
struct SeriesTooShort : DomainError {
    using DomainError::DomainError;
};
struct EmptyInput : DomainError {
    using DomainError::DomainError;
};
struct EigensolverFailure : NumericalError {
    using NumericalError::NumericalError;
};
struct QuadratureFailure : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace isopurity
