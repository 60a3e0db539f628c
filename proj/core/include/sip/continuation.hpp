#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "sip/equilibria.hpp"
#include "sip/stability.hpp"

namespace sip {

enum class BifKind { SN, Hopf, TC, ZH, SNTC, Cusp };

const char* to_string(BifKind k);

struct BifurcationPoint {
    BifKind kind;
    std::array<double, 2> params{}; ///< free parameter value(s); [1] unused in codim 1
    std::array<std::string, 2> free_names{};
    int n_params = 1;
    State location{};
    std::array<std::complex<double>, 3> eigenvalues{};
    /// Hopf diagnostics.
    double omega = 0.0;
    double lyapunov_l1 = 0.0;
    bool lyapunov_valid = false;
};

struct BranchPoint {
    std::array<double, 2> params{};
    Equilibrium eq;
    StabilityReport stab;
    /// Test-function bookkeeping recorded at every accepted point.
    double phi_sn = 0.0;   ///< psi3 = -det J
    double phi_hopf = 0.0; ///< psi1 psi2 - psi3
    double phi_tc = 0.0;   ///< transverse eigenvalue toward the I > 0 cone
    double phi_cusp = 0.0; ///< fold quadratic coefficient (fold curves only)
};

struct Branch {
    std::vector<std::string> free_params;
    std::vector<BranchPoint> points;
    std::vector<BifurcationPoint> bif_points;
};

struct ContinuationOptions {
    double ds_initial = 0.01;
    double ds_min = 1e-5;
    double ds_max = 0.05;
    int corrector_max_iter = 6;
    double corrector_tol = 1e-11;
    double param_tol = 1e-8; ///< bifurcation location accuracy in the parameter
    int max_points = 4000;
    double seed_residual_tol = 1e-8;
    /// Fold curves carry no explicit range; a walk ends when a free parameter
    /// leaves (0, param_cap).
    double param_cap = 50.0;
};

/// Pseudo-arclength predictor-corrector along an equilibrium branch in one
/// free parameter, walking both directions from the seed inside range.
///
/// Interior (E4) seeds run the full 3-state system and monitor
/// phi_SN = psi3 and phi_H = psi1 psi2 - psi3 (reported as Hopf only when
/// psi1 > 0 and psi2 > 0 there; the same function vanishes at neutral
/// saddles). The branch terminates with a TC record where its I component
/// reaches 0, i.e. where it meets the infection-free plane.
///
/// Boundary (E3) seeds run the reduced (S, P) system on the invariant plane
/// I = 0 and monitor phi_TC = transverse eigenvalue (zero exactly where the
/// interior branch crosses) and phi_SN = in-plane 2x2 determinant.
///
/// Every accepted point satisfies the equilibrium residual bound; sign
/// changes are refined to param_tol and recorded. A stability flip between
/// consecutive points without a test-function zero forces step refinement.
///
/// Throws SeedResidualError for inconsistent seeds; FoldTurnError if the
/// corrector diverges at a fold with the step floor reached.
Branch continue_branch(const ParamSet& p, std::string_view free,
                       std::pair<double, double> range, const Equilibrium& seed,
                       const ContinuationOptions& opts = {});

/// First Lyapunov coefficient at a Hopf point via the 3-D normal-form
/// projection. The multilinear forms B and C of the field are contracted
/// directionally with central differences (step 1e-4 scaled by the state
/// magnitude); the third-order tensor is never materialized. Negative l1
/// means supercritical.
/// Throws DegenerateHopfError when |l1| < 1e-10.
double first_lyapunov_coefficient(const ParamSet& p, const BifurcationPoint& hopf);

/// Two-parameter continuation of the fold variety {G = 0, det J = 0} from a
/// detected SN point. Along the curve det J = 0, so the spectrum is
/// {0, l2, l3}; the monitors are
///   psi_ZH   = psi1 (zero with psi2 > 0 means l2,l3 = +-i sqrt(psi2)),
///   psi_SNTC = I    (fold point reaching the infection-free plane),
///   phi_cusp = <p, B(q, q)> with q, p the right/left null vectors kept
///              orientation-continuous (zero at a projection-singular fold
///              point, where both parameter components of the tangent vanish).
/// Zeros are bracketed, then polished by Newton on the augmented system.
/// Throws SeedResidualError / AugmentedSingularError as documented.
Branch continue_fold_curve(const ParamSet& p, std::array<std::string, 2> free,
                           const BifurcationPoint& seed_sn,
                           const ContinuationOptions& opts = {});

namespace detail {
/// Core of the Lyapunov-coefficient computation, parametrized over the field
/// so time-reversal symmetry can be tested.
double l1_projection(const ParamSet& p, const State& x, const Mat3& J, double field_sign);
} // namespace detail

} // namespace sip
