#include "sip/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sip/errors.hpp"

namespace sip {

const char* to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::E1: return "E1";
        case EquilibriumKind::E2: return "E2";
        case EquilibriumKind::E3: return "E3";
        case EquilibriumKind::E4: return "E4";
    }
    return "?";
}

namespace {

double residual_at(const ParamSet& p, const State& x) {
    return vector_field(p, x).max_abs();
}

/// Positive roots of a x^2 + b x + c = 0, numerically stable, ascending.
/// plus_flag marks the root produced by the literal (-b + sqrt(D))/(2a) branch.
struct QuadRoot {
    double value;
    bool plus_branch;
};
std::vector<QuadRoot> positive_quadratic_roots(double a, double b, double c) {
    std::vector<QuadRoot> out;
    if (a == 0.0) {
        if (b != 0.0) {
            const double x = -c / b;
            if (x > 0.0) out.push_back({x, true});
        }
        return out;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return out;
    const double sq = std::sqrt(disc);
    // q avoids cancellation: roots are q/a and c/q.
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    const double r1 = q / a;
    const double plus = (-b + sq) / (2.0 * a);
    if (r1 > 0.0) out.push_back({r1, std::fabs(r1 - plus) < 1e-12 * std::max(1.0, std::fabs(r1))});
    if (q != 0.0) {
        const double r2 = c / q;
        if (r2 > 0.0 && std::fabs(r2 - r1) > 1e-14 * std::max(1.0, std::fabs(r1)))
            out.push_back({r2, std::fabs(r2 - plus) < 1e-12 * std::max(1.0, std::fabs(r2))});
    }
    std::sort(out.begin(), out.end(), [](const QuadRoot& x, const QuadRoot& y) { return x.value < y.value; });
    return out;
}

/// Infection nullcline solved for P at given S: d1 k2 P^2 + (d1 + a1 k2) P +
/// (a1 - e0 S) = 0; linear when k2 = 0. At most one positive root since the
/// other coefficients are positive.
std::optional<double> predator_pressure(const ParamSet& p, double S) {
    const double w1 = p.d1 * p.k2;
    const double w2 = p.d1 + p.a1 * p.k2;
    const double w3 = p.a1 - p.e0 * S;
    auto roots = positive_quadratic_roots(w1, w2, w3);
    if (roots.empty()) return std::nullopt;
    return roots.back().value;
}

/// The susceptible nullcline value at an interior candidate; zero at E4.
double susceptible_residual(const ParamSet& p, const State& x) {
    const double f1 = fear(p.k1, x.P);
    const double f2 = fear(p.k2, x.P);
    const double Srm1 = pow_r(x.S, p.r) / x.S;
    return p.b0 * f1 * (1.0 - (x.S + x.I) / p.K) - p.a0 - p.d0 * Srm1 * x.P -
           p.e0 * x.I * f2;
}

/// Damped Newton polish of a full 3-D equilibrium candidate.
bool newton_polish(const ParamSet& p, State& x, const E4Options& opts) {
    for (int it = 0; it < opts.newton_max_iter; ++it) {
        const VectorFieldValue g = vector_field(p, x);
        const double res = g.max_abs();
        if (res <= opts.residual_tol * 1e-3 || res == 0.0) return true;
        if (!(x.S > 0.0)) return false;
        Mat3 J = jacobian(p, x);
        Vec3 rhs{-g.dS, -g.dI, -g.dP};
        if (!solve_dense(J.a.data(), rhs.data(), 3)) return false;
        double lambda = 1.0;
        for (int half = 0; half < 25; ++half) {
            State trial{x.S + lambda * rhs[0], x.I + lambda * rhs[1], x.P + lambda * rhs[2]};
            if (trial.S > 0.0 && trial.I > 0.0 && trial.P > 0.0 &&
                residual_at(p, trial) < res) {
                x = trial;
                break;
            }
            lambda *= 0.5;
            if (half == 24) return residual_at(p, x) <= opts.residual_tol;
        }
    }
    return residual_at(p, x) <= opts.residual_tol;
}

} // namespace

Equilibrium equilibrium_E1(const ParamSet& p) {
    if (!(p.b0 > p.a0))
        throw InfeasibleError("E1 infeasible: requires b0 > a0 (strict)");
    const double S1 = p.K * (1.0 - p.a0 / p.b0);
    const State loc{S1, 0.0, 0.0};
    return {EquilibriumKind::E1, loc, residual_at(p, loc), true, true};
}

Equilibrium equilibrium_E2(const ParamSet& p) {
    if (!(p.a0 < p.b0 * (1.0 - p.a1 / (p.e0 * p.K))))
        throw InfeasibleError("E2 infeasible: requires a0 < b0 (1 - a1/(e0 K))");
    const double S2 = p.a1 / p.e0;
    const double I2 = (p.e0 * p.K * (p.b0 - p.a0) - p.a1 * p.b0) /
                      (p.e0 * (p.b0 + p.e0 * p.K));
    const State loc{S2, I2, 0.0};
    return {EquilibriumKind::E2, loc, residual_at(p, loc), true, true};
}

std::vector<Equilibrium> equilibrium_E3(const ParamSet& p) {
    const double S3 = std::pow(p.a2 / p.d2, 1.0 / p.r);
    const double Srm1 = pow_r(S3, p.r) / S3;
    // Boundary quadratic in P from the susceptible nullcline at I = 0.
    const double h1 = -p.k1 * p.d0 * Srm1;
    const double h2 = -(p.d0 * Srm1 + p.a0 * p.k1);
    const double h3 = p.b0 * (1.0 - S3 / p.K) - p.a0;
    auto roots = positive_quadratic_roots(h1, h2, h3);
    if (roots.empty())
        throw NoPositiveRootError("E3 infeasible: boundary quadratic has no positive root");
    std::vector<Equilibrium> out;
    out.reserve(roots.size());
    for (const auto& root : roots) {
        State loc{S3, 0.0, root.value};
        // One Newton touch-up on the in-plane system keeps residuals at
        // rounding level for extreme parameter magnitudes.
        const State before = loc;
        const double res = residual_at(p, loc);
        if (res > 1e-12) {
            State polished = before;
            // I stays exactly 0: polish (S, P) only via the 2-D subsystem.
            for (int it = 0; it < 8; ++it) {
                const VectorFieldValue g = vector_field(p, polished);
                if (std::max(std::fabs(g.dS), std::fabs(g.dP)) < 1e-13) break;
                Mat3 J = jacobian(p, polished);
                double a[4] = {J(0, 0), J(0, 2), J(2, 0), J(2, 2)};
                double b[2] = {-g.dS, -g.dP};
                if (!solve_dense(a, b, 2)) break;
                polished.S += b[0];
                polished.P += b[1];
                if (!(polished.S > 0.0 && polished.P > 0.0)) {
                    polished = before;
                    break;
                }
            }
            if (residual_at(p, polished) < res) loc = polished;
        }
        out.push_back({EquilibriumKind::E3, loc, residual_at(p, loc), true, root.plus_branch});
    }
    return out;
}

bool e4_reduction(const ParamSet& p, double I, double& residual_out, State& candidate_out) {
    const double gap = p.a2 - p.d3 * I;
    if (!(gap > 0.0)) return false;
    const double S = std::pow(gap / p.d2, 1.0 / p.r);
    const auto P = predator_pressure(p, S);
    if (!P) return false;
    candidate_out = State{S, I, *P};
    residual_out = susceptible_residual(p, candidate_out);
    return std::isfinite(residual_out);
}

std::vector<Equilibrium> equilibrium_E4(const ParamSet& p, const E4Options& opts) {
    const double Imax = p.a2 / p.d3;
    const double eps = 1e-9 * Imax;
    const int n = opts.initial_subintervals;

    std::vector<double> bracket_roots;
    double prev_res = 0.0;
    State prev_cand{};
    bool prev_ok = false;
    for (int i = 0; i <= n; ++i) {
        const double I = eps + (Imax - 2.0 * eps) * static_cast<double>(i) / n;
        double res;
        State cand;
        const bool ok = e4_reduction(p, I, res, cand);
        if (ok && prev_ok && prev_res * res < 0.0) {
            // Bisect this subinterval down to the I tolerance.
            double lo = eps + (Imax - 2.0 * eps) * static_cast<double>(i - 1) / n;
            double hi = I;
            double flo = prev_res;
            while (hi - lo > opts.bisect_tol) {
                const double mid = 0.5 * (lo + hi);
                double fm;
                State cm;
                if (!e4_reduction(p, mid, fm, cm)) break;
                if (flo * fm <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            bracket_roots.push_back(0.5 * (lo + hi));
        }
        prev_ok = ok;
        prev_res = res;
        prev_cand = cand;
    }

    std::vector<Equilibrium> out;
    for (double I : bracket_roots) {
        double res;
        State x;
        if (!e4_reduction(p, I, res, x)) continue;
        if (!newton_polish(p, x, opts)) continue;
        if (!(x.S > 0.0 && x.I > 0.0 && x.P > 0.0)) continue;
        if (!(p.a2 - p.d3 * x.I > 0.0)) continue;
        const double final_res = residual_at(p, x);
        if (final_res > opts.residual_tol) continue;
        const bool dup = std::any_of(out.begin(), out.end(), [&](const Equilibrium& e) {
            return std::fabs(e.location.S - x.S) < 1e-8 && std::fabs(e.location.I - x.I) < 1e-8 &&
                   std::fabs(e.location.P - x.P) < 1e-8;
        });
        if (!dup) out.push_back({EquilibriumKind::E4, x, final_res, true, true});
    }
    if (out.empty())
        throw NoInteriorEquilibriumError("no interior equilibrium in the reduction bracket");
    std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return a.location.I < b.location.I;
    });
    return out;
}

std::vector<Equilibrium> all_equilibria(const ParamSet& p) {
    std::vector<Equilibrium> out;
    try {
        out.push_back(equilibrium_E1(p));
    } catch (const InfeasibleError&) {
    }
    try {
        out.push_back(equilibrium_E2(p));
    } catch (const InfeasibleError&) {
    }
    try {
        for (auto& e : equilibrium_E3(p)) out.push_back(e);
    } catch (const NoPositiveRootError&) {
    }
    try {
        for (auto& e : equilibrium_E4(p)) out.push_back(e);
    } catch (const NoInteriorEquilibriumError&) {
    }
    return out;
}

} // namespace sip
