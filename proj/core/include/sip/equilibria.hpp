#pragma once

#include <vector>

#include "sip/model.hpp"

namespace sip {

enum class EquilibriumKind { E1, E2, E3, E4 };

const char* to_string(EquilibriumKind k);

/// A located fixed point of the vector field.
struct Equilibrium {
    EquilibriumKind kind;
    State location;
    double residual;   ///< max |G_i| at location; <= 1e-10 for any reported point
    bool feasible;     ///< the kind-specific feasibility inequality held
    bool plus_branch;  ///< for quadratic-root kinds: the root from the "+sqrt" branch
};

/// Solver knobs for the interior-equilibrium reduction.
struct E4Options {
    int initial_subintervals = 512;
    double bisect_tol = 1e-13;
    int newton_max_iter = 50;
    double residual_tol = 1e-10;
};

/// Prey-only point (S1, 0, 0) with S1 = K(1 - a0/b0).
/// Throws InfeasibleError unless b0 > a0 (strict).
Equilibrium equilibrium_E1(const ParamSet& p);

/// Predator-free point (S2, I2, 0), S2 = a1/e0.
/// Throws InfeasibleError unless a0 < b0(1 - a1/(e0 K)).
Equilibrium equilibrium_E2(const ParamSet& p);

/// Infection-free points (S3, 0, P3): S3 = (a2/d2)^(1/r) and P3 the positive
/// root(s) of the boundary quadratic in P (linear when k1 = 0).
/// Throws NoPositiveRootError when no positive P3 exists.
std::vector<Equilibrium> equilibrium_E3(const ParamSet& p);

/// Interior (coexistence) points with S, I, P > 0.
///
/// Strategy: reduce to one scalar equation in I. For candidate I the predator
/// nullcline fixes S = ((a2 - d3 I)/d2)^(1/r), the infection nullcline fixes
/// P as the positive quadratic root, and the remaining residual is the S
/// nullcline. Sign changes over 512 subintervals of I in (0, a2/d3) are
/// bisected to 1e-13, then each candidate is polished by damped Newton on the
/// full 3-D system with the analytic Jacobian. Robust against the multiple
/// roots that fold diagrams require.
///
/// Returned points satisfy residual <= 1e-10, sorted by ascending I.
/// Throws NoInteriorEquilibriumError when no interior root exists.
std::vector<Equilibrium> equilibrium_E4(const ParamSet& p, const E4Options& opts = {});

/// All equilibria that exist for p; infeasible kinds are skipped rather than
/// thrown. Used by endpoint classification and the CLI listing.
std::vector<Equilibrium> all_equilibria(const ParamSet& p);

/// Scalar reduction residual used by equilibrium_E4; exposed so tests can run
/// an independent brute-force sign scan over the same function.
/// Returns false when no positive P exists for this I (residual undefined).
bool e4_reduction(const ParamSet& p, double I, double& residual_out, State& candidate_out);

} // namespace sip
