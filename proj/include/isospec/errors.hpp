// errors.hpp - exception types shared by every isospec module

#pragma once

#include <stdexcept>
#include <string>

namespace isospec {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible shapes or an out-of-range truncation index.
struct DimensionError : Error {
    using Error::Error;
};

// A matrix or family that must be invertible is not.
struct SingularityError : Error {
    using Error::Error;
};

// An iterative routine failed or produced non-finite output.
struct NumericalError : Error {
    using Error::Error;
};

// None of the supported intertwining regimes applies, or a regime
// precondition (positivity, commutation) is violated.
struct RegimeError : Error {
    using Error::Error;
};

// Operation needs a nonzero pairing constant but met a kernel vector.
struct KernelError : Error {
    using Error::Error;
};

// Repeated eigenvalues where a simple spectrum is required.
struct SpectrumError : Error {
    using Error::Error;
};

// |z| outside the convergence disk.
struct DivergenceError : Error {
    using Error::Error;
};

// Norm growth too fast for any exponent alpha <= 1/2.
struct GrowthError : Error {
    using Error::Error;
};

// Moment problem has no closed form for the given sequence.
struct NoClosedFormError : Error {
    using Error::Error;
};

// Empty or otherwise degenerate input (zero matrix, empty family).
struct DegenerateError : Error {
    using Error::Error;
};

// Model parameters violate a stated constraint.
struct ParameterError : Error {
    using Error::Error;
};

// Seed vectors of a ladder pair are not annihilated.
struct SeedVectorError : Error {
    using Error::Error;
};

// Malformed input document.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace isospec
