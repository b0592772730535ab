#pragma once

#include <stdexcept>
#include <string>

namespace lornz {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Truncation level or operator dimension does not match what was asked for.
class InvalidDimension : public Error {
public:
    using Error::Error;
};

/// Two operands were built against different Hilbert layouts.
class LayoutMismatch : public Error {
public:
    using Error::Error;
};

/// A user-facing value (parameter, configuration key) is out of range.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An integrator lost trace, positivity or symmetry beyond the hard limits.
/// The message always suggests what to change (usually a smaller dt).
class NumericalInstability : public Error {
public:
    using Error::Error;
};

/// An iterative procedure did not reach its tolerance within the allotted horizon.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A constructed object violated an identity that holds by construction
/// (e.g. a Hamiltonian that should be Hermitian is not).
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace lornz
