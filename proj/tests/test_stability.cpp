#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "sip/errors.hpp"
#include "sip/stability.hpp"

using namespace sip;
using sip::testing::ModelRng;

namespace {

const ParamSet kFig2{.b0 = 2, .r = 0.7, .e0 = 0.5, .K = 8, .a0 = 0.3, .a1 = 0.4, .a2 = 0.8,
                     .d0 = 0.6, .d1 = 0.7, .d2 = 0.3, .d3 = 0.5, .k1 = 1.2, .k2 = 0.85};

ParamSet with(const ParamSet& base, double k1, double k2) {
    ParamSet p = base;
    p.k1 = k1;
    p.k2 = k2;
    return p;
}

Mat3 diag(double a, double b, double c) {
    Mat3 m;
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
}

} // namespace

TEST_SUITE("stability") {

TEST_CASE("characteristic coefficients of simple matrices") {
    const auto id = characteristic_coefficients(diag(1, 1, 1));
    CHECK(id[0] == doctest::Approx(-3.0));
    CHECK(id[1] == doctest::Approx(3.0));
    CHECK(id[2] == doctest::Approx(-1.0));
    const auto zero = characteristic_coefficients(Mat3{});
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);
    CHECK(zero[2] == 0.0);
}

TEST_CASE("cubic solver handles distinct, paired and repeated roots") {
    // (x-1)(x-2)(x-3): three distinct real roots
    auto r = solve_cubic(-6.0, 11.0, -6.0);
    CHECK_FALSE(r.has_complex_pair);
    double got[3] = {r.roots[0].real(), r.roots[1].real(), r.roots[2].real()};
    std::sort(got, got + 3);
    CHECK(got[0] == doctest::Approx(1.0));
    CHECK(got[1] == doctest::Approx(2.0));
    CHECK(got[2] == doctest::Approx(3.0));

    // (x+1)(x^2+4): one real root and a pure pair
    r = solve_cubic(1.0, 4.0, 4.0);
    CHECK(r.has_complex_pair);
    // (x-2)^3: triple root sits on the discriminant boundary
    r = solve_cubic(-6.0, 12.0, -8.0);
    for (const auto& z : r.roots) CHECK(std::abs(z - 2.0) < 1e-6);
}

TEST_CASE("eigenvalues of the prey-only Jacobian match the closed form") {
    const ParamSet p = with(kFig2, 0.99, 0.85);
    const Equilibrium e1 = equilibrium_E1(p);
    const StabilityReport rep = classify(p, e1);
    // Triangular structure fixes the spectrum explicitly.
    const double l1 = p.a0 - p.b0;
    const double l2 = p.e0 * p.K * (1.0 - p.a0 / p.b0) - p.a1;
    const double l3 = p.d2 * std::pow(p.K - p.a0 * p.K / p.b0, p.r) - p.a2;
    double got[3] = {rep.eigenvalues[0].real(), rep.eigenvalues[1].real(),
                     rep.eigenvalues[2].real()};
    double want[3] = {l1, l2, l3};
    std::sort(got, got + 3);
    std::sort(want, want + 3);
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
    CHECK(l1 == doctest::Approx(-1.7));
    CHECK(l2 == doctest::Approx(3.0));
    CHECK(rep.verdict == Verdict::Unstable);
    CHECK(rep.theorem_conditions_evaluated);
    CHECK(rep.theorem_agrees);
}

TEST_CASE("reported boundary and interior classifications") {
    // Infection-free state stable without birth-rate fear.
    {
        const ParamSet p = with(kFig2, 0.0, 0.85);
        const auto e3 = equilibrium_E3(p);
        const StabilityReport rep = classify(p, e3[0]);
        CHECK(rep.verdict == Verdict::Stable);
        CHECK(rep.theorem_agrees);
    }
    // Interior state unstable with transmission fear removed.
    {
        const ParamSet p = with(kFig2, 2.8, 0.0);
        const auto e4 = equilibrium_E4(p);
        const StabilityReport rep = classify(p, e4[0]);
        CHECK(rep.verdict == Verdict::Unstable);
    }
    // Interior state stable at moderate fear levels.
    {
        const ParamSet p = with(kFig2, 1.2, 0.85);
        const StabilityReport rep = classify(p, equilibrium_E4(p)[0]);
        CHECK(rep.verdict == Verdict::Stable);
        CHECK(rep.psi1 > 0.0);
        CHECK(rep.psi3 > 0.0);
        CHECK(rep.psi1 * rep.psi2 > rep.psi3);
    }
}

TEST_CASE("Routh-Hurwitz equivalence with the spectrum") {
    ModelRng rng(2024);
    int checked = 0;
    while (checked < 10000) {
        const ParamSet p = rng.params();
        const State x = rng.interior_state();
        const StabilityReport rep = classify_jacobian(jacobian(p, x));
        if (rep.verdict == Verdict::Marginal) continue; // boundary of the criterion
        CHECK(rep.routh_hurwitz_stable() == (rep.verdict == Verdict::Stable));
        ++checked;
    }
}

TEST_CASE("eigenvalue residuals stay below the bound") {
    ModelRng rng(5);
    for (int i = 0; i < 500; ++i) {
        const ParamSet p = rng.params();
        const State x = rng.interior_state();
        const Mat3 J = jacobian(p, x);
        const StabilityReport rep = classify_jacobian(J);
        const double bound = 1e-9 * std::pow(frobenius_norm3(J), 3) + 1e-12;
        for (const auto& lam : rep.eigenvalues) {
            const std::complex<double> res =
                ((lam + rep.psi1) * lam + rep.psi2) * lam + rep.psi3;
            CHECK(std::abs(res) <= bound);
        }
    }
}

TEST_CASE("block conditions agree with the spectrum for boundary kinds") {
    ModelRng rng(77);
    int seen = 0;
    for (int i = 0; i < 300 && seen < 120; ++i) {
        const ParamSet p = rng.params();
        for (const auto& e : all_equilibria(p)) {
            if (e.kind == EquilibriumKind::E4 || !(e.location.S > 0.0)) continue;
            const StabilityReport rep = classify(p, e);
            if (rep.verdict == Verdict::Marginal) continue;
            CHECK(rep.theorem_agrees);
            ++seen;
        }
    }
    CHECK(seen >= 60);
}

TEST_CASE("classification refuses the origin") {
    Equilibrium fake{EquilibriumKind::E1, {0.0, 0.0, 0.0}, 0.0, true, true};
    CHECK_THROWS_AS((void)classify(kFig2, fake), SingularStateError);
}

} // TEST_SUITE
