#include "sip/stability.hpp"

#include <algorithm>
#include <cmath>

#include "sip/errors.hpp"

namespace sip {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Marginal: return "marginal";
    }
    return "?";
}

std::array<double, 3> characteristic_coefficients(const Mat3& J) {
    return {-trace3(J), minor_sum3(J), -det3(J)};
}

StabilityReport classify_jacobian(const Mat3& J) {
    StabilityReport rep;
    const auto psi = characteristic_coefficients(J);
    rep.psi1 = psi[0];
    rep.psi2 = psi[1];
    rep.psi3 = psi[2];
    const CubicRoots roots = solve_cubic(psi[0], psi[1], psi[2]);
    rep.eigenvalues = roots.roots;
    rep.has_complex_pair = roots.has_complex_pair;
    double max_re = rep.eigenvalues[0].real();
    for (const auto& lam : rep.eigenvalues) max_re = std::max(max_re, lam.real());
    rep.margin = -max_re;
    if (max_re < -kTolMarginal)
        rep.verdict = Verdict::Stable;
    else if (max_re > kTolMarginal)
        rep.verdict = Verdict::Unstable;
    else
        rep.verdict = Verdict::Marginal;
    return rep;
}

namespace {

void check_E1_conditions(const ParamSet& p, StabilityReport& rep) {
    // Triangular Jacobian: the spectrum is available in closed form.
    const double l1 = p.a0 - p.b0;
    const double l2 = p.e0 * p.K * (1.0 - p.a0 / p.b0) - p.a1;
    const double l3 = p.d2 * std::pow(p.K - p.a0 * p.K / p.b0, p.r) - p.a2;
    rep.theorem_conditions_evaluated = true;
    rep.theorem_stable = l1 < 0.0 && l2 < 0.0 && l3 < 0.0;
}

void check_E2_conditions(const ParamSet& p, StabilityReport& rep) {
    const double A11 = -p.a1 * p.b0 / (p.e0 * p.K);
    const double A12 = -p.a1 * (p.b0 / (p.e0 * p.K) + 1.0);
    const double A21 = (p.e0 * p.K * (p.b0 - p.a0) - p.a1 * p.b0) / (p.b0 + p.e0 * p.K);
    const double A33 = p.d3 * (p.e0 * p.K * (p.b0 - p.a0) - p.a1 * p.b0) /
                           (p.e0 * (p.b0 + p.e0 * p.K)) +
                       p.d2 * std::pow(p.a1 / p.e0, p.r) - p.a2;
    rep.theorem_conditions_evaluated = true;
    rep.theorem_stable = A33 < 0.0 && A11 < 0.0 && A12 * A21 < 0.0;
}

void check_E3_conditions(const ParamSet& p, const State& x, StabilityReport& rep) {
    const Mat3 J = jacobian(p, x);
    const double B11 = J(0, 0), B13 = J(0, 2), B22 = J(1, 1), B31 = J(2, 0), B33 = J(2, 2);
    rep.theorem_conditions_evaluated = true;
    rep.theorem_stable = B22 < 0.0 && B11 + B33 < 0.0 && B11 * B33 - B13 * B31 > 0.0;
}

} // namespace

StabilityReport classify(const ParamSet& p, const Equilibrium& e) {
    if (!(e.location.S > 0.0))
        throw SingularStateError("cannot linearize an equilibrium with S = 0");
    StabilityReport rep = classify_jacobian(jacobian(p, e.location));
    switch (e.kind) {
        case EquilibriumKind::E1: check_E1_conditions(p, rep); break;
        case EquilibriumKind::E2: check_E2_conditions(p, rep); break;
        case EquilibriumKind::E3: check_E3_conditions(p, e.location, rep); break;
        case EquilibriumKind::E4: break; // Routh-Hurwitz on psi is the statement itself
    }
    if (rep.theorem_conditions_evaluated && rep.verdict != Verdict::Marginal)
        rep.theorem_agrees = rep.theorem_stable == (rep.verdict == Verdict::Stable);
    return rep;
}

} // namespace sip
