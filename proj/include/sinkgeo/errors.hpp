#pragma once

#include <stdexcept>
#include <string>

namespace sinkgeo {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user-supplied data: asymmetric or negative costs, nonpositive epsilon,
// weights that do not form a probability vector, dimension mismatches.
struct InvalidInput : Error {
    using Error::Error;
};

// A tangent vector whose weights do not sum to zero.
struct UnbalancedTangent : InvalidInput {
    using InvalidInput::InvalidInput;
};

// A vertical tangent carrying weight where the measure has none.
struct SupportViolation : InvalidInput {
    using InvalidInput::InvalidInput;
};

// Two-point closed forms need m strictly inside (0,1).
struct DegenerateMass : InvalidInput {
    using InvalidInput::InvalidInput;
};

// Numerical failures in the solvers.
struct SolverError : Error {
    using Error::Error;
};

// An operation that needs converged potentials received a non-converged pair.
struct NotConverged : SolverError {
    using SolverError::SolverError;
};

// A nonconstant eigenvector of the self-transport operator sits at eigenvalue 1
// (within 1e-12), so the quotient solve is genuinely singular. This happens for
// disconnected supports and is reported instead of being regularized away.
struct SingularBeyondGauge : SolverError {
    using SolverError::SolverError;
};

// map_A_inverse received coordinates that are not on the image sphere.
struct NotInImage : InvalidInput {
    using InvalidInput::InvalidInput;
};

// tilde_metric_tensor received a direction that is not tangent to the sphere.
struct NotTangent : InvalidInput {
    using InvalidInput::InvalidInput;
};

// Adaptive quadrature did not reach the requested accuracy.
struct QuadratureFailure : SolverError {
    using SolverError::SolverError;
};

// File-level problems, kept separate so the CLI can map them to exit codes.
struct IOError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

}  // namespace sinkgeo
