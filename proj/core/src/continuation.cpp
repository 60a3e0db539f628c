#include "sip/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>

#include "sip/errors.hpp"

namespace sip {

const char* to_string(BifKind k) {
    switch (k) {
        case BifKind::SN: return "SN";
        case BifKind::Hopf: return "Hopf";
        case BifKind::TC: return "TC";
        case BifKind::ZH: return "ZH";
        case BifKind::SNTC: return "SNTC";
        case BifKind::Cusp: return "Cusp";
    }
    return "?";
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Fixed bordering vectors used to start tangent computations; frozen for
/// byte-identical outputs across runs.
constexpr std::array<std::array<double, 5>, 2> kBorderSeeds{{
    {0.37454012, -0.95071431, 0.73199394, 0.59865848, -0.15601864},
    {0.15599452, 0.05808361, -0.86617615, 0.60111501, 0.70807258},
}};

Vec3 param_partial(const ParamSet& p, std::string_view name, const State& x) {
    const double v = param_get(p, name);
    const double h = 1e-7 * std::max(1.0, std::fabs(v));
    const VectorFieldValue gp = vector_field_at(p, name, v + h, x);
    const VectorFieldValue gm = vector_field_at(p, name, v - h, x);
    return {(gp.dS - gm.dS) / (2.0 * h), (gp.dI - gm.dI) / (2.0 * h),
            (gp.dP - gm.dP) / (2.0 * h)};
}

/// Damped Newton with a finite-difference Jacobian; refinement workhorse for
/// the extended (test-function-augmented) systems.
bool newton_fd(const std::function<void(const double*, double*)>& F, double* z, int n,
               double tol, int maxit) {
    std::vector<double> f(static_cast<std::size_t>(n)), fp(static_cast<std::size_t>(n)),
        fm(static_cast<std::size_t>(n)), jac(static_cast<std::size_t>(n * n)),
        step(static_cast<std::size_t>(n)), trial(static_cast<std::size_t>(n));
    for (int it = 0; it < maxit; ++it) {
        F(z, f.data());
        double res = 0.0;
        for (int i = 0; i < n; ++i) res = std::max(res, std::fabs(f[static_cast<std::size_t>(i)]));
        if (res < tol) return true;
        for (int j = 0; j < n; ++j) {
            const double h = 1e-7 * std::max(1.0, std::fabs(z[j]));
            const double save = z[j];
            z[j] = save + h;
            F(z, fp.data());
            z[j] = save - h;
            F(z, fm.data());
            z[j] = save;
            for (int i = 0; i < n; ++i)
                jac[static_cast<std::size_t>(i * n + j)] =
                    (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
        }
        for (int i = 0; i < n; ++i) step[static_cast<std::size_t>(i)] = -f[static_cast<std::size_t>(i)];
        if (!solve_dense(jac.data(), step.data(), n)) return false;
        double lambda = 1.0;
        for (int half = 0; half < 20; ++half) {
            for (int i = 0; i < n; ++i)
                trial[static_cast<std::size_t>(i)] = z[i] + lambda * step[static_cast<std::size_t>(i)];
            F(trial.data(), fp.data());
            double rt = 0.0;
            for (int i = 0; i < n; ++i) rt = std::max(rt, std::fabs(fp[static_cast<std::size_t>(i)]));
            if (rt < res) {
                std::memcpy(z, trial.data(), sizeof(double) * static_cast<std::size_t>(n));
                break;
            }
            lambda *= 0.5;
            if (half == 19) return false;
        }
    }
    std::vector<double> fin(static_cast<std::size_t>(n));
    F(z, fin.data());
    double res = 0.0;
    for (int i = 0; i < n; ++i) res = std::max(res, std::fabs(fin[static_cast<std::size_t>(i)]));
    return res < tol;
}

// ---------------------------------------------------------------------------
// codim-1 continuation
// ---------------------------------------------------------------------------

/// Branch walker state shared by the interior and boundary variants.
/// z layout: interior (S, I, P, alpha); boundary (S, P, alpha).
struct Codim1System {
    ParamSet base;
    std::string free;
    bool boundary; ///< I identically 0 on the branch

    int dim() const { return boundary ? 3 : 4; }

    ParamSet params_at(double alpha) const {
        ParamSet p = base;
        param_set(p, free, alpha);
        return p;
    }

    State state_of(const double* z) const {
        return boundary ? State{z[0], 0.0, z[1]} : State{z[0], z[1], z[2]};
    }
    double alpha_of(const double* z) const { return z[dim() - 1]; }

    void residual(const double* z, double* f) const {
        const ParamSet p = params_at(alpha_of(z));
        const VectorFieldValue g = vector_field(p, state_of(z));
        if (boundary) {
            f[0] = g.dS;
            f[1] = g.dP;
        } else {
            f[0] = g.dS;
            f[1] = g.dI;
            f[2] = g.dP;
        }
    }

    /// Rows of dF/dz (analytic state block, FD parameter column), written into
    /// a dim x dim matrix whose final row the caller fills (bordering).
    void fill_jacobian_rows(const double* z, double* a) const {
        const int n = dim();
        const ParamSet p = params_at(alpha_of(z));
        const State x = state_of(z);
        const Mat3 J = jacobian(p, x);
        const Vec3 gp = param_partial(p, free, x);
        if (boundary) {
            a[0 * n + 0] = J(0, 0);
            a[0 * n + 1] = J(0, 2);
            a[0 * n + 2] = gp[0];
            a[1 * n + 0] = J(2, 0);
            a[1 * n + 1] = J(2, 2);
            a[1 * n + 2] = gp[2];
        } else {
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) a[i * n + j] = J(i, j);
                a[i * n + 3] = (i == 0 ? gp[0] : i == 1 ? gp[1] : gp[2]);
            }
        }
    }
};

struct TestValues {
    double phi_sn = 0.0;
    double phi_hopf = 0.0;
    double phi_tc = 0.0;
    double psi1 = 0.0, psi2 = 0.0;
};

TestValues codim1_tests(const Codim1System& sys, const double* z) {
    const ParamSet p = sys.params_at(sys.alpha_of(z));
    const State x = sys.state_of(z);
    const Mat3 J = jacobian(p, x);
    const auto psi = characteristic_coefficients(J);
    TestValues tv;
    tv.psi1 = psi[0];
    tv.psi2 = psi[1];
    if (sys.boundary) {
        // Spectrum splits: transverse eigenvalue J22 plus the in-plane pair.
        tv.phi_tc = J(1, 1);
        tv.phi_sn = J(0, 0) * J(2, 2) - J(0, 2) * J(2, 0);
        tv.phi_hopf = -(J(0, 0) + J(2, 2)); // in-plane trace; Hopf iff it crosses 0 with det > 0
    } else {
        tv.phi_sn = psi[2];
        tv.phi_hopf = psi[0] * psi[1] - psi[2];
        tv.phi_tc = x.I;
    }
    return tv;
}

bool corrector(const Codim1System& sys, const std::vector<double>& tangent,
               const std::vector<double>& anchor, double* z, int max_iter, double tol,
               int* iters_used) {
    const int n = sys.dim();
    std::vector<double> a(static_cast<std::size_t>(n * n)), f(static_cast<std::size_t>(n)),
        rhs(static_cast<std::size_t>(n));
    for (int it = 0; it < max_iter; ++it) {
        sys.residual(z, f.data());
        double arc = 0.0;
        for (int j = 0; j < n; ++j)
            arc += tangent[static_cast<std::size_t>(j)] * (z[j] - anchor[static_cast<std::size_t>(j)]);
        double res = std::fabs(arc);
        for (int i = 0; i < n - 1; ++i) res = std::max(res, std::fabs(f[static_cast<std::size_t>(i)]));
        if (res < tol) {
            if (iters_used) *iters_used = it;
            return true;
        }
        sys.fill_jacobian_rows(z, a.data());
        for (int j = 0; j < n; ++j)
            a[static_cast<std::size_t>((n - 1) * n + j)] = tangent[static_cast<std::size_t>(j)];
        for (int i = 0; i < n - 1; ++i) rhs[static_cast<std::size_t>(i)] = -f[static_cast<std::size_t>(i)];
        rhs[static_cast<std::size_t>(n - 1)] = -arc;
        if (!solve_dense(a.data(), rhs.data(), n)) return false;
        for (int j = 0; j < n; ++j) z[j] += rhs[static_cast<std::size_t>(j)];
        if (!(sys.state_of(z).S > 0.0)) return false;
    }
    return false;
}

std::vector<double> compute_tangent(const Codim1System& sys, const double* z,
                                    const std::vector<double>& prev) {
    const int n = sys.dim();
    std::vector<double> a(static_cast<std::size_t>(n * n)), rhs(static_cast<std::size_t>(n), 0.0);
    sys.fill_jacobian_rows(z, a.data());
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>((n - 1) * n + j)] = prev[static_cast<std::size_t>(j)];
    rhs[static_cast<std::size_t>(n - 1)] = 1.0;
    std::vector<double> t = rhs;
    std::vector<double> acopy = a;
    if (!solve_dense(acopy.data(), t.data(), n)) {
        // Bordering row parallel to the nullspace: fall back to a frozen seed.
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>((n - 1) * n + j)] = kBorderSeeds[0][static_cast<std::size_t>(j)];
        t = rhs;
        if (!solve_dense(a.data(), t.data(), n))
            throw AugmentedSingularError("tangent system singular");
    }
    double nn = 0.0;
    for (double v : t) nn += v * v;
    nn = std::sqrt(nn);
    for (double& v : t) v /= nn;
    double dot = 0.0;
    for (int j = 0; j < n; ++j) dot += t[static_cast<std::size_t>(j)] * prev[static_cast<std::size_t>(j)];
    if (dot < 0.0)
        for (double& v : t) v = -v;
    return t;
}

Equilibrium make_equilibrium(const ParamSet& p, const State& x, bool boundary) {
    const double res = vector_field(p, x).max_abs();
    return {boundary ? EquilibriumKind::E3 : EquilibriumKind::E4, x, res, true, true};
}

BranchPoint make_branch_point(const Codim1System& sys, const double* z) {
    const double alpha = sys.alpha_of(z);
    const ParamSet p = sys.params_at(alpha);
    const State x = sys.state_of(z);
    BranchPoint bp;
    bp.params = {alpha, kNan};
    bp.eq = make_equilibrium(p, x, sys.boundary);
    bp.stab = classify(p, bp.eq);
    const TestValues tv = codim1_tests(sys, z);
    bp.phi_sn = tv.phi_sn;
    bp.phi_hopf = tv.phi_hopf;
    bp.phi_tc = tv.phi_tc;
    return bp;
}

/// Newton refinement of { system = 0, phi = 0 } starting from a bracket
/// midpoint; phi evaluated through the test-function selector.
///
/// The interior-branch transcritical contact is special: on the boundary
/// plane the infection equation vanishes identically, so { G = 0, I = 0 } is
/// singular exactly at the contact. The point is instead located on the
/// boundary system { G1 = 0, G3 = 0, transverse eigenvalue = 0 } in
/// (S, P, alpha), which is regular there.
bool refine_zero(const Codim1System& sys, int which, std::vector<double>& z, double tol) {
    if (which == 2 && !sys.boundary) {
        Codim1System bsys{sys.base, sys.free, true};
        std::vector<double> zb{z[0], z[2], z[3]};
        if (!refine_zero(bsys, 2, zb, tol)) return false;
        z = {zb[0], 0.0, zb[1], zb[2]};
        return true;
    }
    const int n = sys.dim();
    auto F = [&](const double* zz, double* f) {
        sys.residual(zz, f);
        const TestValues tv = codim1_tests(sys, zz);
        f[n - 1] = which == 0 ? tv.phi_sn : which == 1 ? tv.phi_hopf : tv.phi_tc;
    };
    return newton_fd(F, z.data(), n, tol, 40);
}

BifurcationPoint bif_from_point(const Codim1System& sys, const double* z, BifKind kind) {
    BifurcationPoint bp;
    bp.kind = kind;
    bp.params = {sys.alpha_of(z), kNan};
    bp.free_names = {sys.free, std::string()};
    bp.n_params = 1;
    bp.location = sys.state_of(z);
    const ParamSet p = sys.params_at(sys.alpha_of(z));
    bp.eigenvalues = classify_jacobian(jacobian(p, bp.location)).eigenvalues;
    return bp;
}

} // namespace

namespace detail {

double l1_projection(const ParamSet& p, const State& x, const Mat3& J, double field_sign) {
    using C = std::complex<double>;
    Mat3 M = J;
    for (auto& v : M.a) v *= field_sign;

    const StabilityReport rep = classify_jacobian(M);
    C lam{0.0, 0.0};
    for (const auto& ev : rep.eigenvalues)
        if (ev.imag() > 1e-10) lam = ev;
    if (lam.imag() <= 1e-10)
        throw DegenerateHopfError("no complex pair with positive imaginary part");
    const double omega = lam.imag();

    // The actual eigenvalue (tiny real part included) gives cleaner null
    // vectors than the idealized +- i omega when slightly off the Hopf locus.
    const CVec3 q = eigenvector3(M, lam);
    CVec3 pl = eigenvector3(M.transposed(), std::conj(lam));
    C pq{0.0, 0.0};
    for (int i = 0; i < 3; ++i) pq += std::conj(pl[static_cast<std::size_t>(i)]) * q[static_cast<std::size_t>(i)];
    if (std::abs(pq) < 1e-12) throw DegenerateHopfError("defective eigenvector pair");
    for (auto& v : pl) v /= std::conj(pq); // <p, q> = 1

    const double h = 1e-4 * std::max(1.0, std::sqrt(x.S * x.S + x.I * x.I + x.P * x.P));
    auto G = [&](const Vec3& y) -> Vec3 {
        const VectorFieldValue g = vector_field(p, State{y[0], y[1], y[2]});
        return {field_sign * g.dS, field_sign * g.dI, field_sign * g.dP};
    };
    const Vec3 x0{x.S, x.I, x.P};
    auto at = [&](const Vec3& dir, double c) {
        return Vec3{x0[0] + c * dir[0], x0[1] + c * dir[1], x0[2] + c * dir[2]};
    };
    const Vec3 g0 = G(x0);
    // Directional second difference: Bq(w) = B(w, w).
    auto B2 = [&](const Vec3& w) -> Vec3 {
        const Vec3 gp = G(at(w, h));
        const Vec3 gm = G(at(w, -h));
        Vec3 out;
        for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = (gp[static_cast<std::size_t>(i)] - 2.0 * g0[static_cast<std::size_t>(i)] + gm[static_cast<std::size_t>(i)]) / (h * h);
        return out;
    };
    auto Bsym = [&](const Vec3& u, const Vec3& v) -> Vec3 {
        Vec3 upv, umv;
        for (int i = 0; i < 3; ++i) {
            const auto s = static_cast<std::size_t>(i);
            upv[s] = u[s] + v[s];
            umv[s] = u[s] - v[s];
        }
        const Vec3 a = B2(upv), b = B2(umv);
        Vec3 out;
        for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = (a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]) / 4.0;
        return out;
    };
    // Directional third difference: D3(u) = C(u, u, u).
    auto D3 = [&](const Vec3& u) -> Vec3 {
        const Vec3 g2p = G(at(u, 2.0 * h));
        const Vec3 g1p = G(at(u, h));
        const Vec3 g1m = G(at(u, -h));
        const Vec3 g2m = G(at(u, -2.0 * h));
        Vec3 out;
        for (int i = 0; i < 3; ++i) {
            const auto s = static_cast<std::size_t>(i);
            out[s] = (g2p[s] - 2.0 * g1p[s] + 2.0 * g1m[s] - g2m[s]) / (2.0 * h * h * h);
        }
        return out;
    };
    // C(u, u, v) by polarization of the cubic form.
    auto C3 = [&](const Vec3& u, const Vec3& v) -> Vec3 {
        Vec3 upv, umv;
        for (int i = 0; i < 3; ++i) {
            const auto s = static_cast<std::size_t>(i);
            upv[s] = u[s] + v[s];
            umv[s] = u[s] - v[s];
        }
        const Vec3 a = D3(upv), b = D3(umv), c = D3(v);
        Vec3 out;
        for (int i = 0; i < 3; ++i) {
            const auto s = static_cast<std::size_t>(i);
            out[s] = (a[s] - b[s] - 2.0 * c[s]) / 6.0;
        }
        return out;
    };

    Vec3 qr, qi;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        qr[s] = q[s].real();
        qi[s] = q[s].imag();
    }
    const Vec3 Brr = Bsym(qr, qr), Bii = Bsym(qi, qi), Bri = Bsym(qr, qi);
    CVec3 Bqq, Bqqbar;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        Bqq[s] = C(Brr[s] - Bii[s], 2.0 * Bri[s]);
        Bqqbar[s] = C(Brr[s] + Bii[s], 0.0);
    }
    const Vec3 Crrr = D3(qr), Ciii = D3(qi), Crri = C3(qr, qi), Ciir = C3(qi, qr);
    CVec3 Cqqqb;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        Cqqqb[s] = C(Crrr[s] + Ciir[s], Crri[s] + Ciii[s]);
    }

    // s1 = M^-1 B(q, qbar) (real); s2 = (2 i omega I - M)^-1 B(q, q).
    Vec3 s1;
    {
        Mat3 A = M;
        Vec3 rhs{Bqqbar[0].real(), Bqqbar[1].real(), Bqqbar[2].real()};
        if (!solve_dense(A.a.data(), rhs.data(), 3))
            throw DegenerateHopfError("singular Jacobian in normal-form solve");
        s1 = rhs;
    }
    CVec3 s2;
    {
        std::array<C, 9> A;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                A[static_cast<std::size_t>(3 * i + j)] = C(i == j ? 0.0 : 0.0, i == j ? 2.0 * omega : 0.0) - C(M(i, j));
        CVec3 rhs = Bqq;
        if (!solve_dense_c(A.data(), rhs.data(), 3))
            throw DegenerateHopfError("singular resonance solve");
        s2 = rhs;
    }

    auto Bc = [&](const CVec3& u, const CVec3& v) -> CVec3 {
        Vec3 ur, ui, vr, vi;
        for (int i = 0; i < 3; ++i) {
            const auto s = static_cast<std::size_t>(i);
            ur[s] = u[s].real();
            ui[s] = u[s].imag();
            vr[s] = v[s].real();
            vi[s] = v[s].imag();
        }
        const Vec3 brr = Bsym(ur, vr), bii = Bsym(ui, vi), bri = Bsym(ur, vi), bir = Bsym(ui, vr);
        CVec3 out;
        for (int i = 0; i < 3; ++i) {
            const auto s = static_cast<std::size_t>(i);
            out[s] = C(brr[s] - bii[s], bri[s] + bir[s]);
        }
        return out;
    };
    CVec3 qc = q, qbar;
    for (int i = 0; i < 3; ++i) qbar[static_cast<std::size_t>(i)] = std::conj(q[static_cast<std::size_t>(i)]);
    CVec3 s1c;
    for (int i = 0; i < 3; ++i) s1c[static_cast<std::size_t>(i)] = C(s1[static_cast<std::size_t>(i)], 0.0);
    const CVec3 t2 = Bc(qc, s1c);
    const CVec3 t3 = Bc(qbar, s2);

    C acc{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        acc += std::conj(pl[s]) * (Cqqqb[s] - 2.0 * t2[s] + t3[s]);
    }
    return acc.real() / (2.0 * omega);
}

} // namespace detail

double first_lyapunov_coefficient(const ParamSet& p, const BifurcationPoint& hopf) {
    if (hopf.kind != BifKind::Hopf)
        throw std::invalid_argument("first_lyapunov_coefficient requires a Hopf point");
    ParamSet pp = p;
    for (int i = 0; i < hopf.n_params; ++i)
        if (!hopf.free_names[static_cast<std::size_t>(i)].empty())
            param_set(pp, hopf.free_names[static_cast<std::size_t>(i)], hopf.params[static_cast<std::size_t>(i)]);
    const Mat3 J = jacobian(pp, hopf.location);
    const double l1 = detail::l1_projection(pp, hopf.location, J, 1.0);
    if (std::fabs(l1) < 1e-10)
        throw DegenerateHopfError("first Lyapunov coefficient below 1e-10");
    return l1;
}

Branch continue_branch(const ParamSet& p, std::string_view free,
                       std::pair<double, double> range, const Equilibrium& seed,
                       const ContinuationOptions& opts) {
    if (!param_exists(free)) throw ConfigError("unknown free parameter: " + std::string(free));
    if (seed.kind != EquilibriumKind::E3 && seed.kind != EquilibriumKind::E4)
        throw std::invalid_argument("continuation seeds must be E3 or E4 equilibria");

    Codim1System sys{p, std::string(free), seed.kind == EquilibriumKind::E3};
    const int n = sys.dim();
    const double alpha0 = param_get(p, free);
    if (alpha0 < range.first - 1e-12 || alpha0 > range.second + 1e-12)
        throw ConfigError("seed parameter value outside continuation range");

    std::vector<double> z0(static_cast<std::size_t>(n));
    if (sys.boundary) {
        z0 = {seed.location.S, seed.location.P, alpha0};
    } else {
        z0 = {seed.location.S, seed.location.I, seed.location.P, alpha0};
    }
    {
        std::vector<double> f(static_cast<std::size_t>(n));
        sys.residual(z0.data(), f.data());
        double res = 0.0;
        for (int i = 0; i < n - 1; ++i) res = std::max(res, std::fabs(f[static_cast<std::size_t>(i)]));
        if (res > opts.seed_residual_tol)
            throw SeedResidualError("continuation seed residual " + std::to_string(res));
    }

    Branch out;
    out.free_params = {std::string(free)};

    auto walk = [&](double direction, std::vector<BranchPoint>& pts,
                    std::vector<BifurcationPoint>& bifs) {
        std::vector<double> z = z0;
        std::vector<double> prev_dir(static_cast<std::size_t>(n), 0.0);
        prev_dir[static_cast<std::size_t>(n - 1)] = direction;
        std::vector<double> tangent = compute_tangent(sys, z.data(), prev_dir);

        pts.push_back(make_branch_point(sys, z.data()));
        double ds = opts.ds_initial;
        int easy_accepts = 0;

        for (int step = 0; step < opts.max_points; ++step) {
            std::vector<double> z_pred(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) z_pred[static_cast<std::size_t>(j)] = z[static_cast<std::size_t>(j)] + ds * tangent[static_cast<std::size_t>(j)];
            std::vector<double> z_new = z_pred;
            int iters = 0;
            const bool ok = corrector(sys, tangent, z_pred, z_new.data(),
                                      opts.corrector_max_iter, opts.corrector_tol, &iters);
            if (!ok) {
                if (ds <= opts.ds_min * 1.0001) {
                    // Failure at the cone boundary just ends the branch; away
                    // from it the arclength parametrization should not stall.
                    const State xc = sys.state_of(z.data());
                    if (xc.S < 1e-6 || xc.P < 1e-6 || (!sys.boundary && xc.I < 1e-6)) break;
                    throw FoldTurnError("corrector diverged with the step floor reached");
                }
                ds = std::max(opts.ds_min, 0.5 * ds);
                easy_accepts = 0;
                continue;
            }

            // Domain checks: stop when the state leaves the positive cone.
            const State xn = sys.state_of(z_new.data());
            const double alpha_n = sys.alpha_of(z_new.data());
            if (!(xn.S > 1e-12) || !(xn.P > -1e-9) || (!sys.boundary && xn.I < -1e-9)) {
                // Interior branch reaching I = 0 is the transcritical contact;
                // refine it exactly, record, then stop this direction.
                if (!sys.boundary) {
                    std::vector<double> zr = z;
                    if (refine_zero(sys, 2, zr, 1e-12)) {
                        BifurcationPoint bp = bif_from_point(sys, zr.data(), BifKind::TC);
                        bp.location.I = std::max(bp.location.I, 0.0);
                        bifs.push_back(bp);
                        pts.push_back(make_branch_point(sys, zr.data()));
                    }
                }
                break;
            }
            if (alpha_n < range.first || alpha_n > range.second) {
                // Land exactly on the range boundary with the parameter pinned.
                const double alpha_b = std::clamp(alpha_n, range.first, range.second);
                std::vector<double> zb = z_new;
                zb[static_cast<std::size_t>(n - 1)] = alpha_b;
                auto F = [&](const double* zz, double* f) {
                    sys.residual(zz, f);
                    f[n - 1] = zz[n - 1] - alpha_b;
                };
                if (newton_fd(F, zb.data(), n, opts.corrector_tol, 30))
                    pts.push_back(make_branch_point(sys, zb.data()));
                break;
            }

            BranchPoint bp_prev = pts.back();
            BranchPoint bp_new = make_branch_point(sys, z_new.data());

            // Interior I = 0 crossing inside the cone (grazing fold) handled
            // by the same TC refinement as the domain exit above.
            auto record = [&](int which, BifKind kind) {
                std::vector<double> zr(static_cast<std::size_t>(n));
                for (int j = 0; j < n; ++j) zr[static_cast<std::size_t>(j)] = 0.5 * (z[static_cast<std::size_t>(j)] + z_new[static_cast<std::size_t>(j)]);
                if (!refine_zero(sys, which, zr, 1e-12)) return false;
                const double alpha_r = sys.alpha_of(zr.data());
                if (alpha_r < std::min(bp_prev.params[0], bp_new.params[0]) - 1e-6 ||
                    alpha_r > std::max(bp_prev.params[0], bp_new.params[0]) + 1e-6)
                    return false;
                BifurcationPoint bp = bif_from_point(sys, zr.data(), kind);
                if (kind == BifKind::Hopf) {
                    const TestValues tv = codim1_tests(sys, zr.data());
                    // phi_H also vanishes at neutral saddles; require a genuine
                    // imaginary pair.
                    if (sys.boundary) {
                        if (!(tv.phi_sn > 0.0)) return false;
                        bp.omega = std::sqrt(tv.phi_sn);
                    } else {
                        if (!(tv.psi2 > 0.0) || !(tv.psi1 > 0.0)) return false;
                        bp.omega = std::sqrt(tv.psi2);
                    }
                    try {
                        const ParamSet pr = sys.params_at(alpha_r);
                        bp.lyapunov_l1 = detail::l1_projection(
                            pr, sys.state_of(zr.data()), jacobian(pr, sys.state_of(zr.data())), 1.0);
                        bp.lyapunov_valid = true;
                    } catch (const DegenerateHopfError&) {
                        bp.lyapunov_valid = false;
                    }
                }
                bifs.push_back(bp);
                return true;
            };

            bool refined_any = false;
            bool left_cone = false;
            if (bp_prev.phi_sn * bp_new.phi_sn < 0.0) refined_any |= record(0, BifKind::SN);
            if (bp_prev.phi_hopf * bp_new.phi_hopf < 0.0) refined_any |= record(1, BifKind::Hopf);
            if (bp_prev.phi_tc * bp_new.phi_tc < 0.0) {
                const bool got = record(2, BifKind::TC);
                refined_any |= got;
                // An interior branch crossing I = 0 leaves the feasible cone;
                // end it exactly on the contact point.
                left_cone = !sys.boundary;
                if (left_cone && got) {
                    const BifurcationPoint& tc = bifs.back();
                    std::vector<double> zr{tc.location.S, 0.0, tc.location.P, tc.params[0]};
                    pts.push_back(make_branch_point(sys, zr.data()));
                }
            }
            if (left_cone) break;

            // A stability flip without a test-function zero means the step
            // jumped over structure: refine the step instead of accepting.
            const bool flip = bp_prev.stab.verdict != bp_new.stab.verdict &&
                              bp_prev.stab.verdict != Verdict::Marginal &&
                              bp_new.stab.verdict != Verdict::Marginal;
            if (flip && !refined_any && ds > opts.ds_min * 1.0001) {
                ds = std::max(opts.ds_min, 0.5 * ds);
                easy_accepts = 0;
                continue;
            }

            tangent = compute_tangent(sys, z_new.data(), tangent);
            z = z_new;
            pts.push_back(bp_new);

            if (iters <= 3) {
                if (++easy_accepts >= 2) {
                    ds = std::min(opts.ds_max, ds * 1.3);
                    easy_accepts = 0;
                }
            } else {
                easy_accepts = 0;
            }
        }
    };

    std::vector<BranchPoint> fwd, bwd;
    std::vector<BifurcationPoint> bif_fwd, bif_bwd;
    walk(+1.0, fwd, bif_fwd);
    walk(-1.0, bwd, bif_bwd);

    out.points.reserve(fwd.size() + bwd.size());
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) out.points.push_back(*it);
    for (std::size_t i = 1; i < fwd.size(); ++i) out.points.push_back(fwd[i]);
    out.bif_points = std::move(bif_bwd);
    for (auto& b : bif_fwd) out.bif_points.push_back(b);
    // The two walks can rediscover the same point when the seed sits close to it.
    std::vector<BifurcationPoint> unique;
    for (auto& b : out.bif_points) {
        const bool dup = std::any_of(unique.begin(), unique.end(), [&](const BifurcationPoint& u) {
            return u.kind == b.kind && std::fabs(u.params[0] - b.params[0]) < 1e-7;
        });
        if (!dup) unique.push_back(std::move(b));
    }
    out.bif_points = std::move(unique);
    return out;
}

// ---------------------------------------------------------------------------
// codim-2 fold-curve continuation
// ---------------------------------------------------------------------------

namespace {

struct FoldSystem {
    ParamSet base;
    std::array<std::string, 2> free;

    ParamSet params_at(const double* z) const {
        ParamSet p = base;
        param_set(p, free[0], z[3]);
        param_set(p, free[1], z[4]);
        return p;
    }
    static State state_of(const double* z) { return {z[0], z[1], z[2]}; }

    void residual(const double* z, double* f) const {
        const ParamSet p = params_at(z);
        const State x = state_of(z);
        const VectorFieldValue g = vector_field(p, x);
        f[0] = g.dS;
        f[1] = g.dI;
        f[2] = g.dP;
        f[3] = det3(jacobian(p, x));
    }

    void fill_jacobian_rows(const double* z, double* a) const {
        const ParamSet p = params_at(z);
        const State x = state_of(z);
        const Mat3 J = jacobian(p, x);
        const Vec3 g1 = param_partial(p, free[0], x);
        const Vec3 g2 = param_partial(p, free[1], x);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) a[i * 5 + j] = J(i, j);
            a[i * 5 + 3] = (i == 0 ? g1[0] : i == 1 ? g1[1] : g1[2]);
            a[i * 5 + 4] = (i == 0 ? g2[0] : i == 1 ? g2[1] : g2[2]);
        }
        // det J row by central differences over all five coordinates.
        for (int j = 0; j < 5; ++j) {
            double zp[5], zm[5];
            std::memcpy(zp, z, sizeof zp);
            std::memcpy(zm, z, sizeof zm);
            const double h = 1e-6 * std::max(1.0, std::fabs(z[j]));
            zp[j] += h;
            zm[j] -= h;
            const double dp = det3(jacobian(params_at(zp), state_of(zp)));
            const double dm = det3(jacobian(params_at(zm), state_of(zm)));
            a[3 * 5 + j] = (dp - dm) / (2.0 * h);
        }
    }
};

struct FoldVectors {
    Vec3 q{};  // right null vector of J
    Vec3 pl{}; // left null vector, scaled so dot(pl, q) = 1
};

FoldVectors fold_null_vectors(const Mat3& J, const FoldVectors* prev) {
    FoldVectors v;
    v.q = null_vector3(J);
    if (prev && dot3(v.q, prev->q) < 0.0)
        for (double& c : v.q) c = -c;
    Vec3 pl = null_vector3(J.transposed());
    const double pq = dot3(pl, v.q);
    if (std::fabs(pq) > 1e-12) {
        for (double& c : pl) c /= pq;
    } else if (prev && dot3(pl, prev->pl) < 0.0) {
        for (double& c : pl) c = -c;
    }
    v.pl = pl;
    return v;
}

/// Quadratic fold coefficient <p, B(q, q)>; its zero marks a fold point whose
/// parameter-plane projection is singular (both parameter tangent components
/// vanish there).
double cusp_coefficient(const ParamSet& p, const State& x, const FoldVectors& v) {
    const double h = 1e-5 * std::max(1.0, std::sqrt(x.S * x.S + x.I * x.I + x.P * x.P));
    auto G = [&](double c) {
        const VectorFieldValue g =
            vector_field(p, State{x.S + c * v.q[0], x.I + c * v.q[1], x.P + c * v.q[2]});
        return Vec3{g.dS, g.dI, g.dP};
    };
    const Vec3 gp = G(h), g0 = G(0.0), gm = G(-h);
    Vec3 b;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        b[s] = (gp[s] - 2.0 * g0[s] + gm[s]) / (h * h);
    }
    return dot3(v.pl, b);
}

struct FoldMonitor {
    double psi1 = 0.0, psi2 = 0.0;
    double i_comp = 0.0;
    double cusp = 0.0;
};

} // namespace

Branch continue_fold_curve(const ParamSet& p, std::array<std::string, 2> free,
                           const BifurcationPoint& seed_sn, const ContinuationOptions& opts) {
    if (seed_sn.kind != BifKind::SN)
        throw std::invalid_argument("fold-curve continuation requires an SN seed");
    for (const auto& name : free)
        if (!param_exists(name)) throw ConfigError("unknown free parameter: " + name);

    FoldSystem sys{p, free};
    double z0[5] = {seed_sn.location.S, seed_sn.location.I, seed_sn.location.P,
                    param_get(p, free[0]), param_get(p, free[1])};
    {
        double f[5];
        sys.residual(z0, f);
        const double res = std::max({std::fabs(f[0]), std::fabs(f[1]), std::fabs(f[2])});
        const double det_scale = std::pow(frobenius_norm3(jacobian(sys.params_at(z0), FoldSystem::state_of(z0))), 3);
        if (res > opts.seed_residual_tol || std::fabs(f[3]) > 1e-6 * std::max(1.0, det_scale))
            throw SeedResidualError("fold seed violates {G = 0, det J = 0}");
        // Polish the seed onto the fold variety before walking.
        auto F = [&](const double* zz, double* ff) { sys.residual(zz, ff); };
        auto Fb = [&](const double* zz, double* ff) {
            F(zz, ff);
            ff[4] = zz[4] - z0[4];
        };
        newton_fd(Fb, z0, 5, 1e-12, 30);
    }

    Branch out;
    out.free_params = {free[0], free[1]};

    auto tangent_at = [&](const double* z, const std::vector<double>& prev) {
        std::vector<double> a(25), rhs(5, 0.0);
        sys.fill_jacobian_rows(z, a.data());
        for (int j = 0; j < 5; ++j) a[static_cast<std::size_t>(4 * 5 + j)] = prev[static_cast<std::size_t>(j)];
        rhs[4] = 1.0;
        std::vector<double> t = rhs;
        std::vector<double> acopy = a;
        if (!solve_dense(acopy.data(), t.data(), 5)) {
            for (int s = 0; s < 2; ++s) {
                for (int j = 0; j < 5; ++j) a[static_cast<std::size_t>(4 * 5 + j)] = kBorderSeeds[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
                t = rhs;
                std::vector<double> a2 = a;
                if (solve_dense(a2.data(), t.data(), 5)) break;
                if (s == 1) throw AugmentedSingularError("fold tangent system singular");
            }
        }
        double nn = 0.0;
        for (double v : t) nn += v * v;
        nn = std::sqrt(nn);
        for (double& v : t) v /= nn;
        double dot = 0.0;
        for (int j = 0; j < 5; ++j) dot += t[static_cast<std::size_t>(j)] * prev[static_cast<std::size_t>(j)];
        if (dot < 0.0)
            for (double& v : t) v = -v;
        return t;
    };

    auto monitor_at = [&](const double* z, const FoldVectors* prev_v, FoldVectors* out_v) {
        const ParamSet pp = sys.params_at(z);
        const State x = FoldSystem::state_of(z);
        const Mat3 J = jacobian(pp, x);
        const auto psi = characteristic_coefficients(J);
        FoldVectors v = fold_null_vectors(J, prev_v);
        FoldMonitor m;
        m.psi1 = psi[0];
        m.psi2 = psi[1];
        m.i_comp = x.I;
        m.cusp = cusp_coefficient(pp, x, v);
        if (out_v) *out_v = v;
        return m;
    };

    auto branch_point_at = [&](const double* z, const FoldMonitor& m) {
        BranchPoint bp;
        bp.params = {z[3], z[4]};
        const ParamSet pp = sys.params_at(z);
        bp.eq = make_equilibrium(pp, FoldSystem::state_of(z), false);
        bp.eq.kind = z[1] > 1e-9 ? EquilibriumKind::E4 : EquilibriumKind::E3;
        bp.stab = classify_jacobian(jacobian(pp, bp.eq.location));
        bp.phi_sn = 0.0; // identically zero on the fold variety
        bp.phi_hopf = m.psi1;
        bp.phi_tc = m.i_comp;
        bp.phi_cusp = m.cusp;
        return bp;
    };

    auto refine_extended = [&](double* z, int which) {
        // which: 0 -> psi1 (ZH), 1 -> I (fold point on the boundary plane)
        auto F = [&](const double* zz, double* f) {
            sys.residual(zz, f);
            if (which == 0) {
                const Mat3 J = jacobian(sys.params_at(zz), FoldSystem::state_of(zz));
                f[4] = -trace3(J);
            } else {
                f[4] = zz[1];
            }
        };
        return newton_fd(F, z, 5, 1e-11, 40);
    };

    auto walk = [&](double direction, std::vector<BranchPoint>& pts,
                    std::vector<BifurcationPoint>& bifs) {
        double z[5];
        std::memcpy(z, z0, sizeof z);
        std::vector<double> prev_dir(5, 0.0);
        prev_dir[4] = direction;
        std::vector<double> tangent;
        try {
            tangent = tangent_at(z, prev_dir);
        } catch (const AugmentedSingularError&) {
            prev_dir.assign(kBorderSeeds[0].begin(), kBorderSeeds[0].end());
            tangent = tangent_at(z, prev_dir);
        }
        if (tangent[4] * direction < 0.0)
            for (double& v : tangent) v = -v;

        FoldVectors vecs;
        FoldMonitor mon = monitor_at(z, nullptr, &vecs);
        pts.push_back(branch_point_at(z, mon));

        double ds = opts.ds_initial;
        int easy_accepts = 0;
        for (int step = 0; step < opts.max_points; ++step) {
            double z_pred[5];
            for (int j = 0; j < 5; ++j) z_pred[j] = z[j] + ds * tangent[static_cast<std::size_t>(j)];
            double z_new[5];
            std::memcpy(z_new, z_pred, sizeof z_new);

            // Arclength-bordered Newton on the augmented system.
            bool ok = true;
            int iters = 0;
            {
                double a[25], f[5], rhs[5];
                for (iters = 0; iters < opts.corrector_max_iter; ++iters) {
                    sys.residual(z_new, f);
                    double arc = 0.0;
                    for (int j = 0; j < 5; ++j) arc += tangent[static_cast<std::size_t>(j)] * (z_new[j] - z_pred[j]);
                    double res = std::fabs(arc);
                    for (int i = 0; i < 4; ++i) res = std::max(res, std::fabs(f[i]));
                    if (res < opts.corrector_tol) break;
                    sys.fill_jacobian_rows(z_new, a);
                    for (int j = 0; j < 5; ++j) a[4 * 5 + j] = tangent[static_cast<std::size_t>(j)];
                    for (int i = 0; i < 4; ++i) rhs[i] = -f[i];
                    rhs[4] = -arc;
                    if (!solve_dense(a, rhs, 5)) {
                        ok = false; // AugmentedSingular: retried with a smaller step below
                        break;
                    }
                    for (int j = 0; j < 5; ++j) z_new[j] += rhs[j];
                    if (!(z_new[0] > 0.0)) {
                        ok = false;
                        break;
                    }
                    if (iters == opts.corrector_max_iter - 1) ok = false;
                }
            }
            if (!ok) {
                if (ds <= opts.ds_min * 1.0001) {
                    if (z[0] < 1e-6 || z[1] < 1e-6 || z[2] < 1e-6) break;
                    throw FoldTurnError("fold-curve corrector diverged at the step floor");
                }
                ds = std::max(opts.ds_min, 0.5 * ds);
                easy_accepts = 0;
                continue;
            }

            // Leave when the state or the parameters exit the valid domain.
            if (z_new[0] < 1e-9 || z_new[2] < 1e-9 || z_new[1] < -1e-9 ||
                z_new[3] < 1e-9 || z_new[4] < 1e-9 || z_new[3] > opts.param_cap ||
                z_new[4] > opts.param_cap)
                break;

            FoldVectors vecs_new;
            FoldMonitor mon_new = monitor_at(z_new, &vecs, &vecs_new);

            // ZH: psi1 crosses zero with psi2 > 0 (pair +- i sqrt(psi2)).
            if (mon.psi1 * mon_new.psi1 < 0.0 && std::min(mon.psi2, mon_new.psi2) > 0.0) {
                double zr[5];
                for (int j = 0; j < 5; ++j) zr[j] = 0.5 * (z[j] + z_new[j]);
                if (refine_extended(zr, 0)) {
                    BifurcationPoint bp;
                    bp.kind = BifKind::ZH;
                    bp.params = {zr[3], zr[4]};
                    bp.free_names = {free[0], free[1]};
                    bp.n_params = 2;
                    bp.location = FoldSystem::state_of(zr);
                    const Mat3 J = jacobian(sys.params_at(zr), bp.location);
                    const StabilityReport rep = classify_jacobian(J);
                    bp.eigenvalues = rep.eigenvalues;
                    bp.omega = std::sqrt(std::max(rep.psi2, 0.0));
                    bifs.push_back(bp);
                }
            }
            // Fold point reaching the infection-free plane.
            if (mon.i_comp * mon_new.i_comp < 0.0) {
                double zr[5];
                for (int j = 0; j < 5; ++j) zr[j] = 0.5 * (z[j] + z_new[j]);
                if (refine_extended(zr, 1)) {
                    BifurcationPoint bp;
                    bp.kind = BifKind::SNTC;
                    bp.params = {zr[3], zr[4]};
                    bp.free_names = {free[0], free[1]};
                    bp.n_params = 2;
                    bp.location = FoldSystem::state_of(zr);
                    bp.location.I = 0.0;
                    bp.eigenvalues =
                        classify_jacobian(jacobian(sys.params_at(zr), bp.location)).eigenvalues;
                    bifs.push_back(bp);
                }
            }
            // Projection-singular fold point: quadratic coefficient zero.
            if (mon.cusp * mon_new.cusp < 0.0) {
                // Bisect along the curve; the defining function needs the
                // orientation-continuous null vectors, so Newton is not used.
                double za[5], zb[5];
                std::memcpy(za, z, sizeof za);
                std::memcpy(zb, z_new, sizeof zb);
                double ca = mon.cusp;
                FoldVectors va = vecs;
                for (int bis = 0; bis < 48; ++bis) {
                    double zm[5];
                    for (int j = 0; j < 5; ++j) zm[j] = 0.5 * (za[j] + zb[j]);
                    auto F = [&](const double* zz, double* f) { sys.residual(zz, f); };
                    auto Fb = [&](const double* zz, double* f) {
                        F(zz, f);
                        double acc = 0.0;
                        for (int j = 0; j < 5; ++j) acc += tangent[static_cast<std::size_t>(j)] * (zz[j] - zm[j]);
                        f[4] = acc;
                    };
                    if (!newton_fd(Fb, zm, 5, 1e-11, 20)) break;
                    FoldVectors vm;
                    const FoldMonitor mm = monitor_at(zm, &va, &vm);
                    if (ca * mm.cusp <= 0.0) {
                        std::memcpy(zb, zm, sizeof zb);
                    } else {
                        std::memcpy(za, zm, sizeof za);
                        ca = mm.cusp;
                        va = vm;
                    }
                    if (std::hypot(za[3] - zb[3], za[4] - zb[4]) < 1e-7) break;
                }
                BifurcationPoint bp;
                bp.kind = BifKind::Cusp;
                bp.params = {0.5 * (za[3] + zb[3]), 0.5 * (za[4] + zb[4])};
                bp.free_names = {free[0], free[1]};
                bp.n_params = 2;
                double zr[5];
                for (int j = 0; j < 5; ++j) zr[j] = 0.5 * (za[j] + zb[j]);
                bp.location = FoldSystem::state_of(zr);
                bp.eigenvalues =
                    classify_jacobian(jacobian(sys.params_at(zr), bp.location)).eigenvalues;
                bifs.push_back(bp);
            }

            tangent = tangent_at(z_new, tangent);
            std::memcpy(z, z_new, sizeof z);
            vecs = vecs_new;
            mon = mon_new;
            pts.push_back(branch_point_at(z, mon));

            if (iters <= 3) {
                if (++easy_accepts >= 2) {
                    ds = std::min(opts.ds_max, ds * 1.3);
                    easy_accepts = 0;
                }
            } else {
                easy_accepts = 0;
            }
        }
    };

    std::vector<BranchPoint> fwd, bwd;
    std::vector<BifurcationPoint> bif_fwd, bif_bwd;
    walk(+1.0, fwd, bif_fwd);
    walk(-1.0, bwd, bif_bwd);

    out.points.reserve(fwd.size() + bwd.size());
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) out.points.push_back(*it);
    for (std::size_t i = 1; i < fwd.size(); ++i) out.points.push_back(fwd[i]);
    out.bif_points = std::move(bif_bwd);
    for (auto& b : bif_fwd) out.bif_points.push_back(b);
    return out;
}

} // namespace sip
