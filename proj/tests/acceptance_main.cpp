// Acceptance suite: one reproduction criterion per entry, each printed as a
// single PASS/FAIL line. Run without arguments for the full suite or with a
// criterion number (1-10) for a single entry; the exit status reflects the
// selected entries only.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sip/continuation.hpp"
#include "sip/dynamics.hpp"
#include "sip/errors.hpp"

using namespace sip;
using sip::testing::ModelRng;

namespace {

const ParamSet kFoldParams{.b0 = 8, .r = 0.5, .e0 = 4, .K = 4, .a0 = 0.5, .a1 = 0.4,
                           .a2 = 0.8, .d0 = 0.7, .d1 = 0.7, .d2 = 0.4, .d3 = 0.5,
                           .k1 = 0.1, .k2 = 0.6};
const ParamSet kHopfParams{.b0 = 2, .r = 0.7, .e0 = 0.5, .K = 8, .a0 = 0.3, .a1 = 0.4,
                           .a2 = 0.8, .d0 = 0.6, .d1 = 0.7, .d2 = 0.3, .d3 = 0.5,
                           .k1 = 1.2, .k2 = 0.85};
const ParamSet kExtinctionParams{.b0 = 10, .r = 0.5, .e0 = 6, .K = 5, .a0 = 0.5, .a1 = 0.4,
                                 .a2 = 0.8, .d0 = 0.7, .d1 = 0.7, .d2 = 0.3, .d3 = 0.5,
                                 .k1 = 0.0, .k2 = 0.8};
const ParamSet kPredationParams{.b0 = 2, .r = 0.7, .e0 = 0.5, .K = 8, .a0 = 0.3, .a1 = 0.4,
                                .a2 = 0.8, .d0 = 0.6, .d1 = 0.8, .d2 = 0.3, .d3 = 0.5,
                                .k1 = 2.8, .k2 = 1.8};

struct Check {
    std::string detail;
    bool pass = true;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool state_within(const State& got, double S, double I, double P, double tol) {
    return std::fabs(got.S - S) <= tol && std::fabs(got.I - I) <= tol &&
           std::fabs(got.P - P) <= tol;
}

ParamSet with(const ParamSet& base, const char* name, double v) {
    ParamSet p = base;
    param_set(p, name, v);
    return p;
}

const BifurcationPoint* find_kind(const Branch& b, BifKind kind, int nth = 0) {
    int seen = 0;
    for (const auto& bp : b.bif_points)
        if (bp.kind == kind && seen++ == nth) return &bp;
    return nullptr;
}

Branch fold_seed_branch() {
    return continue_branch(kFoldParams, "k2", {0.35, 0.8}, equilibrium_E4(kFoldParams)[0]);
}

// 1. fold of interior equilibria in the birth-fear parameter
Check criterion_sn_k1() {
    Check c;
    const ParamSet p = with(with(kFoldParams, "k2", 1.0), "k1", 0.3);
    const Branch b = continue_branch(p, "k1", {0.05, 1.0}, equilibrium_E4(p)[0]);
    const auto* sn = find_kind(b, BifKind::SN);
    c.require(sn != nullptr, "no fold detected");
    if (!sn) return c;
    c.note("k1* = " + fmt(sn->params[0]));
    c.require(std::fabs(sn->params[0] - 0.4181) <= 0.005, "k1* outside 0.4181 +- 0.005");
    c.require(state_within(sn->location, 0.4615, 1.0565, 0.8523, 1e-2),
              "fold state outside 1e-2 of (0.4615, 1.0565, 0.8523)");
    return c;
}

// 2. fold in the transmission-fear parameter
Check criterion_sn_k2() {
    Check c;
    const Branch b = fold_seed_branch();
    const auto* sn = find_kind(b, BifKind::SN);
    c.require(sn != nullptr, "no fold detected");
    if (!sn) return c;
    c.note("k2* = " + fmt(sn->params[0]));
    c.require(std::fabs(sn->params[0] - 0.4417) <= 0.005, "k2* outside 0.4417 +- 0.005");
    c.require(state_within(sn->location, 0.6418, 0.9591, 1.5854, 1e-2),
              "fold state outside 1e-2 of (0.6418, 0.9591, 1.5854)");
    return c;
}

// 3. transcritical and Hopf points along k1
Check criterion_tc_hopf_k1() {
    Check c;
    const ParamSet pb = with(kHopfParams, "k1", 1.0);
    const Branch e3 = continue_branch(pb, "k1", {0.05, 3.0}, equilibrium_E3(pb)[0]);
    const auto* tc = find_kind(e3, BifKind::TC);
    c.require(tc != nullptr, "no transcritical point on the boundary branch");
    if (tc) {
        c.note("k1_TC = " + fmt(tc->params[0]));
        c.require(std::fabs(tc->params[0] - 0.4219) <= 0.005, "k1_TC outside 0.4219 +- 0.005");
        c.require(state_within(tc->location, 4.0600, 0.0, 0.9978, 1e-2),
                  "TC state outside 1e-2 of (4.0600, 0, 0.9978)");
    }
    const Branch e4 = continue_branch(kHopfParams, "k1", {0.05, 3.0},
                                      equilibrium_E4(kHopfParams)[0]);
    const auto* hopf = find_kind(e4, BifKind::Hopf);
    c.require(hopf != nullptr, "no Hopf point on the interior branch");
    if (hopf) {
        c.note("k1_H = " + fmt(hopf->params[0]) + ", l1 = " + fmt(hopf->lyapunov_l1));
        c.require(std::fabs(hopf->params[0] - 2.5075) <= 0.01, "k1_H outside 2.5075 +- 0.01");
        c.require(state_within(hopf->location, 1.6184, 0.7596, 0.3308, 1e-2),
                  "Hopf state outside 1e-2 of (1.6184, 0.7596, 0.3308)");
        c.require(hopf->lyapunov_valid && hopf->lyapunov_l1 < 0.0, "l1 not negative");
    }
    return c;
}

// 4. Hopf and transcritical points along k2
Check criterion_hopf_tc_k2() {
    Check c;
    const ParamSet p = with(with(kHopfParams, "k1", 0.99), "k2", 1.0);
    const Branch e4 = continue_branch(p, "k2", {0.05, 3.0}, equilibrium_E4(p)[0]);
    const auto* hopf = find_kind(e4, BifKind::Hopf);
    c.require(hopf != nullptr, "no Hopf point on the interior branch");
    if (hopf) {
        c.note("k2_H = " + fmt(hopf->params[0]) + ", l1 = " + fmt(hopf->lyapunov_l1));
        c.require(std::fabs(hopf->params[0] - 0.1536) <= 0.005, "k2_H outside 0.1536 +- 0.005");
        c.require(hopf->lyapunov_valid && hopf->lyapunov_l1 < 0.0, "l1 not negative");
    }
    const Branch e3 = continue_branch(p, "k2", {0.05, 3.0}, equilibrium_E3(p)[0]);
    const auto* tc = find_kind(e3, BifKind::TC);
    c.require(tc != nullptr, "no transcritical point on the boundary branch");
    if (tc) {
        c.note("k2_TC = " + fmt(tc->params[0]));
        c.require(std::fabs(tc->params[0] - 1.7885) <= 0.01, "k2_TC outside 1.7885 +- 0.01");
    }
    return c;
}

void check_zh(Check& c, const BifurcationPoint* zh, double k2_want, double p2_want,
              double omega_want, const char* tag) {
    c.require(zh != nullptr, std::string(tag) + ": missing");
    if (!zh) return;
    c.note(std::string(tag) + " at (" + fmt(zh->params[0]) + ", " + fmt(zh->params[1]) +
           "), pair +-" + fmt(zh->omega) + "i");
    c.require(std::fabs(zh->params[0] - k2_want) <= 0.01,
              std::string(tag) + ": first parameter off");
    c.require(std::fabs(zh->params[1] - p2_want) <= 0.01,
              std::string(tag) + ": second parameter off");
    double min_abs = 1e300, pair_im = 0.0;
    for (const auto& ev : zh->eigenvalues) {
        min_abs = std::min(min_abs, std::abs(ev));
        if (std::fabs(ev.imag()) > 1e-4) pair_im = std::max(pair_im, std::fabs(ev.imag()));
    }
    c.require(min_abs <= 1e-4, std::string(tag) + ": zero eigenvalue not clean");
    c.require(std::fabs(pair_im - omega_want) <= 0.02,
              std::string(tag) + ": imaginary pair off");
}

// 5. zero-Hopf point on the fold curve in (k2, d0)
Check criterion_zh_k2_d0() {
    Check c;
    const Branch seed = fold_seed_branch();
    const auto* sn = find_kind(seed, BifKind::SN);
    c.require(sn != nullptr, "no fold seed");
    if (!sn) return c;
    const Branch fold =
        continue_fold_curve(with(kFoldParams, "k2", sn->params[0]), {"k2", "d0"}, *sn);
    check_zh(c, find_kind(fold, BifKind::ZH), 0.9917, 1.4225, 2.2402, "ZH");
    return c;
}

// 6. two zero-Hopf points on the fold curve in (k2, K)
Check criterion_zh_k2_K() {
    Check c;
    const Branch seed = fold_seed_branch();
    const auto* sn = find_kind(seed, BifKind::SN);
    c.require(sn != nullptr, "no fold seed");
    if (!sn) return c;
    const Branch fold =
        continue_fold_curve(with(kFoldParams, "k2", sn->params[0]), {"k2", "K"}, *sn);
    std::vector<const BifurcationPoint*> zhs;
    for (const auto& bp : fold.bif_points)
        if (bp.kind == BifKind::ZH) zhs.push_back(&bp);
    c.require(zhs.size() == 2, "expected exactly two zero-Hopf points, found " +
                                   std::to_string(zhs.size()));
    if (zhs.size() != 2) return c;
    std::sort(zhs.begin(), zhs.end(),
              [](auto* a, auto* b) { return a->params[1] < b->params[1]; });
    check_zh(c, zhs[0], 0.2868, 5.0261, 2.6876, "ZH1");
    check_zh(c, zhs[1], 0.2585, 5.5590, 1.9754, "ZH2");
    return c;
}

// 7. fold-transcritical contact points on the fold curve in (k2, K)
Check criterion_sntc_k2_K() {
    Check c;
    const Branch seed = fold_seed_branch();
    const auto* sn = find_kind(seed, BifKind::SN);
    c.require(sn != nullptr, "no fold seed");
    if (!sn) return c;
    const Branch fold =
        continue_fold_curve(with(kFoldParams, "k2", sn->params[0]), {"k2", "K"}, *sn);
    for (const auto& bp : fold.bif_points)
        if (bp.kind == BifKind::Cusp)
            c.note("projection-singular fold point at (" + fmt(bp.params[0]) + ", " +
                   fmt(bp.params[1]) + ")");
    int found = 0;
    for (auto [k2_want, K_want] : {std::pair{0.4508, 3.9784}, {0.2271, 5.7454}}) {
        const BifurcationPoint* hit = nullptr;
        for (const auto& bp : fold.bif_points)
            if (bp.kind == BifKind::SNTC && std::fabs(bp.params[0] - k2_want) <= 0.01 &&
                std::fabs(bp.params[1] - K_want) <= 0.01 && std::fabs(bp.location.I) <= 1e-4)
                hit = &bp;
        if (hit)
            ++found;
        else
            c.require(false, "no boundary-contact fold point with |I| <= 1e-4 near (" +
                                 fmt(k2_want) + ", " + fmt(K_want) + ")");
    }
    c.require(found == 2, "fold curve does not meet the infection-free plane there");
    return c;
}

// 8. finite-time extinction and the no-fear endemic state
Check criterion_fte() {
    Check c;
    {
        const Trajectory tr = integrate(kExtinctionParams, {3, 2, 4}, 500.0);
        const auto& final = tr.samples.back().second;
        c.note("endemic endpoint (" + fmt(final.S) + ", " + fmt(final.I) + ", " + fmt(final.P) +
               ")");
        c.require(state_within(final, 2.8194, 0.5925, 4.5959, 1e-3),
                  "no-fear run not within 1e-3 of (2.8194, 0.5925, 4.5959) by t = 500");
    }
    {
        const ParamSet p = with(kExtinctionParams, "k1", 0.2);
        auto fte_at = [&](double eps) {
            IntegrateOptions o;
            o.eps_ext = eps;
            const Trajectory tr = integrate(p, {3, 2, 4}, 100.0, o);
            for (const auto& ev : tr.events)
                if (ev.kind == EventKind::FTE) return ev.time;
            return -1.0;
        };
        const double t_star = fte_at(1e-6);
        c.note("t* = " + fmt(t_star));
        c.require(t_star > 0.0 && std::fabs(t_star - 14.3) <= 0.5,
                  "extinction time outside 14.3 +- 0.5");
        const double spread = std::fabs(fte_at(1e-5) - fte_at(1e-8));
        c.note("threshold sensitivity " + fmt(spread));
        c.require(spread < 0.05, "extinction time too sensitive to the threshold");
    }
    return c;
}

// 9. selective predation switches the attractor
Check criterion_selective_predation() {
    Check c;
    const auto chk = check_selective_predation_threshold(kPredationParams);
    c.note("threshold = " + fmt(chk.threshold));
    c.require(std::fabs(chk.threshold - 1.6) <= 8.9e-16, "threshold not 1.6");
    {
        const Trajectory tr = integrate(kPredationParams, {0.8, 0.9, 1.1}, 500.0);
        c.require(state_within(tr.samples.back().second, 2.3492, 0.5091, 0.3758, 1e-2),
                  "d1 = 0.8 endpoint not within 1e-2 of (2.3492, 0.5091, 0.3758)");
    }
    {
        const ParamSet p = with(kPredationParams, "d1", 6.0);
        c.require(check_selective_predation_threshold(p).predicted_extinct,
                  "d1 = 6 not predicted extinct");
        const Trajectory tr = integrate(p, {0.8, 0.9, 1.1}, 500.0);
        c.require(state_within(tr.samples.back().second, 4.0600, 0.0, 0.4070, 1e-2),
                  "d1 = 6 endpoint not within 1e-2 of (4.0600, 0, 0.4070)");
    }
    return c;
}

// 10. property suites
Check criterion_properties() {
    Check c;
    // analytic vs finite-difference Jacobian
    {
        ModelRng rng(7);
        bool ok = true;
        for (int i = 0; i < 100 && ok; ++i) {
            const ParamSet p = rng.params();
            const State x = rng.interior_state();
            const Mat3 J = jacobian(p, x);
            const Mat3 F = sip::testing::fd_jacobian(p, x);
            for (int r = 0; r < 3; ++r)
                for (int col = 0; col < 3; ++col)
                    ok = ok && std::fabs(J(r, col) - F(r, col)) <=
                                   1e-5 * std::max(1.0, std::fabs(F(r, col)));
        }
        c.require(ok, "analytic Jacobian deviates from the FD oracle");
    }
    // Routh-Hurwitz <-> spectrum equivalence
    {
        ModelRng rng(2024);
        int checked = 0;
        bool ok = true;
        while (checked < 10000 && ok) {
            const StabilityReport rep =
                classify_jacobian(jacobian(rng.params(), rng.interior_state()));
            if (rep.verdict == Verdict::Marginal) continue;
            ok = rep.routh_hurwitz_stable() == (rep.verdict == Verdict::Stable);
            ++checked;
        }
        c.require(ok, "Routh-Hurwitz / spectrum equivalence failed");
    }
    // residual bound over a random sample of equilibria
    {
        ModelRng rng(101);
        bool ok = true;
        int seen = 0;
        for (int i = 0; i < 50; ++i)
            for (const auto& e : all_equilibria(rng.params())) {
                ok = ok && e.residual <= 1e-10;
                ++seen;
            }
        c.require(ok && seen > 50, "equilibrium residual bound violated");
    }
    // monitors silent on valid bounded-regime instances
    {
        ModelRng rng(303);
        bool ok = true;
        for (int i = 0; i < 100 && ok; ++i) {
            const ParamSet p = rng.params(/*bounded_regime=*/true);
            const State x0 = rng.interior_state(0.1, 3.0);
            const auto bound = dissipativity_bound(p, x0);
            if (!bound) {
                ok = false;
                break;
            }
            const Trajectory tr = integrate(p, x0, 60.0);
            ok = ok && tr.terminated_by != Termination::BoundViolation;
            for (const auto& [t, x] : tr.samples)
                ok = ok && x.nonnegative() && x.S + x.I + x.P <= *bound + 1e-6;
        }
        c.require(ok, "a nonnegativity or dissipativity monitor fired");
    }
    // fold root-count oracle on both detected folds
    {
        const Branch bk2 = fold_seed_branch();
        const auto* sn2 = find_kind(bk2, BifKind::SN);
        const ParamSet pa = with(with(kFoldParams, "k2", 1.0), "k1", 0.3);
        const Branch bk1 = continue_branch(pa, "k1", {0.05, 1.0}, equilibrium_E4(pa)[0]);
        const auto* sn1 = find_kind(bk1, BifKind::SN);
        c.require(sn1 && sn2, "missing folds for the root-count oracle");
        if (sn1 && sn2) {
            auto count = [](const ParamSet& p) {
                try {
                    return static_cast<int>(equilibrium_E4(p).size());
                } catch (const NoInteriorEquilibriumError&) {
                    return 0;
                }
            };
            const ParamSet base1 = with(kFoldParams, "k2", 1.0);
            c.require(count(with(base1, "k1", sn1->params[0] - 0.01)) == 2 &&
                          count(with(base1, "k1", sn1->params[0] + 0.01)) == 0,
                      "root counts around the k1 fold are not {2, 0}");
            c.require(count(with(kFoldParams, "k2", sn2->params[0] + 0.01)) == 2 &&
                          count(with(kFoldParams, "k2", sn2->params[0] - 0.01)) == 0,
                      "root counts around the k2 fold are not {2, 0}");
        }
    }
    // integrator order on the frozen linear problem
    {
        Mat3 A;
        A(0, 0) = -1.0;
        A(0, 1) = 0.3;
        A(1, 0) = -0.3;
        A(1, 1) = -1.0;
        A(2, 2) = -0.5;
        const Vec3 y0{1.0, 1.0, 1.0};
        const double t = 2.0;
        const double ct = std::cos(0.3 * t), st = std::sin(0.3 * t), et = std::exp(-t);
        const Vec3 exact{et * (ct + st), et * (ct - st), std::exp(-0.5 * t)};
        auto err = [&](int n) {
            const Vec3 y = detail::propagate_linear(A, y0, t, n);
            return std::max({std::fabs(y[0] - exact[0]), std::fabs(y[1] - exact[1]),
                             std::fabs(y[2] - exact[2])});
        };
        const double order = std::log2(err(16) / err(32));
        c.note("measured order " + fmt(order));
        c.require(order >= 4.5, "integrator order below 4.5");
    }
    return c;
}

struct Criterion {
    int number;
    const char* title;
    std::function<Check()> run;
};

const std::vector<Criterion> kCriteria = {
    {1, "fold in k1 at 0.4181", criterion_sn_k1},
    {2, "fold in k2 at 0.4417", criterion_sn_k2},
    {3, "transcritical 0.4219 and Hopf 2.5075 in k1", criterion_tc_hopf_k1},
    {4, "Hopf 0.1536 and transcritical 1.7885 in k2", criterion_hopf_tc_k2},
    {5, "zero-Hopf in (k2, d0) at (0.9917, 1.4225)", criterion_zh_k2_d0},
    {6, "zero-Hopf pair in (k2, K)", criterion_zh_k2_K},
    {7, "fold-transcritical contacts in (k2, K)", criterion_sntc_k2_K},
    {8, "finite-time extinction at t* ~ 14.3", criterion_fte},
    {9, "selective predation threshold and attractor switch", criterion_selective_predation},
    {10, "property suites", criterion_properties},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    int failures = 0;
    for (const auto& cr : kCriteria) {
        if (only != 0 && cr.number != only) continue;
        Check c;
        try {
            c = cr.run();
        } catch (const std::exception& e) {
            c.pass = false;
            c.note(std::string("exception: ") + e.what());
        }
        std::printf("[%s] criterion %2d: %s%s%s\n", c.pass ? "PASS" : "FAIL", cr.number,
                    cr.title, c.detail.empty() ? "" : " -- ", c.detail.c_str());
        if (!c.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
