#pragma once

#include <array>
#include <complex>

#include "sip/equilibria.hpp"
#include "sip/model.hpp"

namespace sip {

/// Verdict boundary: stable iff max Re(lambda) < -kTolMarginal, marginal iff
/// |max Re| <= kTolMarginal. Continuation test functions depend on this sign
/// convention being crisp.
inline constexpr double kTolMarginal = 1e-7;

enum class Verdict { Stable, Unstable, Marginal };

const char* to_string(Verdict v);

struct StabilityReport {
    std::array<std::complex<double>, 3> eigenvalues;
    bool has_complex_pair = false;
    double psi1 = 0.0; ///< -trace
    double psi2 = 0.0; ///< sum of principal 2x2 minors
    double psi3 = 0.0; ///< -determinant
    Verdict verdict = Verdict::Marginal;
    double margin = 0.0; ///< min over eigenvalues of -Re(lambda)

    /// Block-condition check for boundary kinds (E1/E2/E3); mirrors the
    /// closed-form eigenvalue structure of those Jacobians.
    bool theorem_conditions_evaluated = false;
    bool theorem_stable = false;
    bool theorem_agrees = true;

    bool routh_hurwitz_stable() const {
        return psi1 > 0.0 && psi3 > 0.0 && psi1 * psi2 > psi3;
    }
};

/// Coefficients (psi1, psi2, psi3) of det(lambda I - J) =
/// lambda^3 + psi1 lambda^2 + psi2 lambda + psi3.
std::array<double, 3> characteristic_coefficients(const Mat3& J);

/// Eigenvalues and verdict for an arbitrary model Jacobian.
StabilityReport classify_jacobian(const Mat3& J);

/// Full classification of an equilibrium, including the block conditions for
/// E1 (diagonal-triangular spectrum), E2 (A-quantities) and E3 (B-quantities),
/// which must agree with the eigenvalue verdict away from the margin.
/// Throws SingularStateError for states with S = 0.
StabilityReport classify(const ParamSet& p, const Equilibrium& e);

} // namespace sip
