#pragma once

#include <stdexcept>
#include <string>

namespace sip {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linearization requested at a state where the Jacobian is singular (S = 0).
struct SingularStateError : Error {
    using Error::Error;
};

/// A closed-form equilibrium fails its feasibility inequality.
struct InfeasibleError : Error {
    using Error::Error;
};

/// The boundary-equilibrium quadratic has no positive real root.
struct NoPositiveRootError : Error {
    using Error::Error;
};

/// The interior-equilibrium scalar reduction has no root in its bracket.
struct NoInteriorEquilibriumError : Error {
    using Error::Error;
};

/// The adaptive step controller stalled below the step floor.
struct StepSizeUnderflowError : Error {
    using Error::Error;
};

/// Two equilibria match a trajectory endpoint within tolerance.
struct AmbiguousEndpointError : Error {
    using Error::Error;
};

/// A continuation seed does not satisfy its defining system.
struct SeedResidualError : Error {
    using Error::Error;
};

/// The corrector diverged at a fold despite arclength parametrization.
struct FoldTurnError : Error {
    using Error::Error;
};

/// The bordered Jacobian of an augmented system is rank-deficient.
struct AugmentedSingularError : Error {
    using Error::Error;
};

/// A Hopf point with |l1| below the degeneracy threshold (possible Bautin point).
struct DegenerateHopfError : Error {
    using Error::Error;
};

/// Malformed scenario or CLI configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// A golden value comparison failed.
struct GoldenMismatchError : Error {
    using Error::Error;
};

} // namespace sip
