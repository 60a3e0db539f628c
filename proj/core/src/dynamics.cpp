#include "sip/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sip/errors.hpp"

namespace sip {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::FTE: return "FTE";
        case EventKind::Converged: return "Converged";
        case EventKind::IExtinct: return "IExtinct";
        case EventKind::BoundViolation: return "BoundViolation";
        case EventKind::Oscillatory: return "Oscillatory";
    }
    return "?";
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::MaxTime: return "max-time";
        case Termination::Fte: return "fte";
        case Termination::Converged: return "converged";
        case Termination::BoundViolation: return "bound-violation";
    }
    return "?";
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
constexpr double kD1 = -12715105075.0 / 11282082432.0, kD3 = 87487479700.0 / 32700410799.0,
                 kD4 = -10690763975.0 / 1880347072.0, kD5 = 701980252875.0 / 199316789632.0,
                 kD6 = -1453857185.0 / 822651844.0, kD7 = 69997945.0 / 29380423.0;

using Y = std::array<double, 3>;

Y axpy(const Y& y, double h, std::initializer_list<std::pair<double, const Y*>> terms) {
    Y out = y;
    for (const auto& [c, k] : terms)
        for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] += h * c * (*k)[static_cast<std::size_t>(i)];
    return out;
}

struct DenseSegment {
    double t0 = 0.0, h = 0.0;
    std::array<Y, 5> rcont{};

    Y eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        Y out;
        for (int i = 0; i < 3; ++i) {
            const auto s = static_cast<std::size_t>(i);
            out[s] = rcont[0][s] +
                     th * (rcont[1][s] +
                           th1 * (rcont[2][s] + th * (rcont[3][s] + th1 * rcont[4][s])));
        }
        return out;
    }
};

struct LinearField {
    const Mat3* A;
    Y operator()(const Y& y) const {
        const Vec3 v = mul3(*A, {y[0], y[1], y[2]});
        return {v[0], v[1], v[2]};
    }
};

struct Field {
    const ParamSet* p;
    bool reduced = false; // post-extinction subsystem with S identically 0

    Y operator()(const Y& y) const {
        if (reduced) {
            const double I = std::max(y[1], 0.0), P = std::max(y[2], 0.0);
            return {0.0, -p->a1 * I - p->d1 * I * P, -p->a2 * P + p->d3 * I * P};
        }
        // Tiny negative overshoots inside a trial stage evaluate as 0.
        const State x{std::max(y[0], 0.0), std::max(y[1], 0.0), std::max(y[2], 0.0)};
        const VectorFieldValue g = vector_field(*p, x);
        return {g.dS, g.dI, g.dP};
    }
};

struct StepResult {
    Y y1;
    Y k7; // FSAL
    double err;
    DenseSegment dense;
};

template <class F>
StepResult dopri5_step(const F& f, double t, const Y& y, const Y& k1, double h,
                       double rtol, double atol) {
    const Y k2 = f(axpy(y, h, {{kA21, &k1}}));
    const Y k3 = f(axpy(y, h, {{kA31, &k1}, {kA32, &k2}}));
    const Y k4 = f(axpy(y, h, {{kA41, &k1}, {kA42, &k2}, {kA43, &k3}}));
    const Y k5 = f(axpy(y, h, {{kA51, &k1}, {kA52, &k2}, {kA53, &k3}, {kA54, &k4}}));
    const Y k6 = f(axpy(y, h, {{kA61, &k1}, {kA62, &k2}, {kA63, &k3}, {kA64, &k4}, {kA65, &k5}}));
    StepResult r;
    r.y1 = axpy(y, h, {{kB1, &k1}, {kB3, &k3}, {kB4, &k4}, {kB5, &k5}, {kB6, &k6}});
    r.k7 = f(r.y1);

    double err2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double e = h * (kE1 * k1[s] + kE3 * k3[s] + kE4 * k4[s] + kE5 * k5[s] +
                              kE6 * k6[s] + kE7 * r.k7[s]);
        const double sc = atol + rtol * std::max(std::fabs(y[s]), std::fabs(r.y1[s]));
        err2 += (e / sc) * (e / sc);
    }
    r.err = std::sqrt(err2 / 3.0);

    r.dense.t0 = t;
    r.dense.h = h;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double dy = r.y1[s] - y[s];
        const double bspl = h * k1[s] - dy;
        r.dense.rcont[0][s] = y[s];
        r.dense.rcont[1][s] = dy;
        r.dense.rcont[2][s] = bspl;
        r.dense.rcont[3][s] = dy - h * r.k7[s] - bspl;
        r.dense.rcont[4][s] = h * (kD1 * k1[s] + kD3 * k3[s] + kD4 * k4[s] + kD5 * k5[s] +
                                   kD6 * k6[s] + kD7 * r.k7[s]);
    }
    return r;
}

double initial_step(const Field& f, const Y& y0, const Y& f0, double rtol, double atol) {
    double dn = 0.0, yn = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double sc = atol + rtol * std::fabs(y0[s]);
        dn += (f0[s] / sc) * (f0[s] / sc);
        yn += (y0[s] / sc) * (y0[s] / sc);
    }
    double h0 = (dn > 1e-10 && yn > 1e-10) ? 0.01 * std::sqrt(yn / dn) : 1e-6;
    const Y y1 = axpy(y0, h0, {{1.0, &f0}});
    const Y f1 = f(y1);
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double sc = atol + rtol * std::fabs(y0[s]);
        d2 += ((f1[s] - f0[s]) / sc) * ((f1[s] - f0[s]) / sc);
    }
    d2 = std::sqrt(d2) / h0;
    const double dmax = std::max(std::sqrt(dn), d2);
    const double h1 = (dmax > 1e-15) ? std::pow(0.01 / dmax, 0.2) : std::max(1e-6, h0 * 1e-3);
    return std::min(100.0 * h0, h1);
}

double rel_distance(const State& a, const State& b) {
    auto comp = [](double x, double y) { return std::fabs(x - y) / std::max(1.0, std::fabs(y)); };
    return std::max({comp(a.S, b.S), comp(a.I, b.I), comp(a.P, b.P)});
}

struct IntegrationAbort {};

Trajectory integrate_impl(const ParamSet& p, const State& x0, double t_max,
                          const IntegrateOptions& opts,
                          const std::vector<Equilibrium>& eqs) {
    Trajectory traj;
    traj.terminated_by = Termination::MaxTime;
    Field field{&p, false};

    Y y{x0.S, x0.I, x0.P};
    double t = 0.0;
    Y k1 = field(y);
    double h = initial_step(field, y, k1, opts.rtol, opts.atol);
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
    h = std::min(h, t_max);

    const int n_out = std::max(opts.output_samples, 1);
    const double dt_out = t_max / n_out;
    int next_out = 0;

    const std::optional<double> q_bound =
        opts.monitor_bounds ? dissipativity_bound(p, x0) : std::nullopt;

    int conv_count = 0;
    double conv_t0 = 0.0;
    const Equilibrium* conv_eq = nullptr;
    bool converged_recorded = false;

    auto push_sample = [&](double ts, const State& xs) {
        traj.samples.emplace_back(ts, xs);
        if (q_bound && xs.S + xs.I + xs.P > *q_bound + 1e-6) {
            traj.events.push_back({EventKind::BoundViolation, ts, xs, "dissipativity bound exceeded"});
            traj.terminated_by = Termination::BoundViolation;
            throw IntegrationAbort{};
        }
        // Convergence bookkeeping on the uniform output grid.
        if (!converged_recorded && !eqs.empty()) {
            const VectorFieldValue g = vector_field(p, xs);
            const Equilibrium* nearest = nullptr;
            double best = std::numeric_limits<double>::max();
            for (const auto& e : eqs) {
                const double d = rel_distance(xs, e.location);
                if (d < best) {
                    best = d;
                    nearest = &e;
                }
            }
            if (g.max_abs() <= opts.conv_gtol && nearest && best <= opts.endpoint_match_rtol) {
                if (conv_count == 0 || conv_eq != nearest) {
                    conv_count = 0;
                    conv_t0 = ts;
                    conv_eq = nearest;
                }
                if (++conv_count >= opts.conv_window) {
                    traj.events.push_back({EventKind::Converged, conv_t0, xs,
                                           to_string(conv_eq->kind)});
                    converged_recorded = true;
                    if (opts.stop_on_converged) {
                        traj.terminated_by = Termination::Converged;
                        throw IntegrationAbort{};
                    }
                }
            } else {
                conv_count = 0;
            }
        }
    };

    auto emit_outputs = [&](const DenseSegment& seg, double t_end) {
        while (next_out * dt_out <= t_end + 1e-14 * t_max && next_out <= n_out) {
            const double ts = next_out * dt_out;
            if (ts >= seg.t0 - 1e-14 * t_max) {
                const Y ys = seg.eval(std::min(ts, t_end));
                push_sample(ts, State{std::max(ys[0], 0.0), std::max(ys[1], 0.0),
                                      std::max(ys[2], 0.0)});
            }
            ++next_out;
        }
    };

    push_sample(0.0, x0);
    next_out = 1;
    if (vector_field(p, x0).max_abs() == 0.0) {
        // Stationary start: fill the grid and return without stepping.
        for (; next_out <= n_out; ++next_out) traj.samples.emplace_back(next_out * dt_out, x0);
        return traj;
    }

    int rejected_in_row = 0;
    try {
        while (t < t_max) {
            h = std::min(h, t_max - t);
            const double h_min = 1e-14 * std::max(1.0, std::fabs(t));
            if (h < h_min)
                throw StepSizeUnderflowError("step size underflow at t = " + std::to_string(t));

            StepResult r = dopri5_step(field, t, y, k1, h, opts.rtol, opts.atol);
            if (r.err > 1.0) {
                ++rejected_in_row;
                h *= std::max(0.2, 0.9 * std::pow(r.err, -0.2));
                continue;
            }

            const double t1 = t + h;

            // Finite-time extinction of S: first crossing of eps_ext, located
            // on the dense output to the event time tolerance.
            if (!field.reduced && y[0] > opts.eps_ext && r.y1[0] <= opts.eps_ext) {
                double lo = t, hi = t1;
                while (hi - lo > opts.event_time_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (r.dense.eval(mid)[0] > opts.eps_ext)
                        lo = mid;
                    else
                        hi = mid;
                }
                const double t_star = 0.5 * (lo + hi);
                const Y ys = r.dense.eval(t_star);
                const State xs{opts.eps_ext, std::max(ys[1], 0.0), std::max(ys[2], 0.0)};
                emit_outputs(r.dense, t_star);
                traj.events.push_back({EventKind::FTE, t_star, xs, "S reached eps_ext"});
                if (!opts.continue_after_fte) {
                    if (traj.samples.empty() || t_star > traj.samples.back().first)
                        traj.samples.emplace_back(t_star, State{0.0, xs.I, xs.P});
                    traj.terminated_by = Termination::Fte;
                    return traj;
                }
                field.reduced = true;
                t = t_star;
                y = {0.0, xs.I, xs.P};
                k1 = field(y);
                continue;
            }

            emit_outputs(r.dense, t1);

            t = t1;
            y = r.y1;
            for (int i = 0; i < 3; ++i) {
                auto s = static_cast<std::size_t>(i);
                if (y[s] < 0.0) {
                    if (y[s] < -1e-10) {
                        const State xs{y[0], y[1], y[2]};
                        traj.events.push_back(
                            {EventKind::BoundViolation, t, xs, "negative component"});
                        traj.terminated_by = Termination::BoundViolation;
                        return traj;
                    }
                    y[s] = 0.0; // roundoff-level clamp
                }
            }
            k1 = r.k7;

            const double facmax = rejected_in_row > 0 ? 1.0 : 5.0;
            rejected_in_row = 0;
            h *= std::min(facmax, std::max(0.2, 0.9 * std::pow(std::max(r.err, 1e-10), -0.2)));
            if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
        }
    } catch (const IntegrationAbort&) {
        return traj;
    }
    return traj;
}

void scan_i_extinction(const ParamSet&, Trajectory& traj, double t_max) {
    // Sustained extinction of I: below 1e-8 from some sample onward, holding
    // for at least 10% of the horizon. A population absent from the start has
    // nothing to go extinct.
    const double hold = 0.1 * t_max;
    const auto& s = traj.samples;
    if (s.empty() || s.front().second.I < 1e-8) return;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].second.I >= 1e-8) continue;
        std::size_t j = i;
        while (j < s.size() && s[j].second.I < 1e-8) ++j;
        if ((j == s.size() ? s.back().first : s[j].first) - s[i].first >= hold) {
            traj.events.push_back({EventKind::IExtinct, s[i].first, s[i].second,
                                   "I below 1e-8, sustained"});
            return;
        }
        i = j;
    }
}

} // namespace

Trajectory integrate(const ParamSet& p, const State& x0, double t_max,
                     const IntegrateOptions& opts) {
    if (!x0.nonnegative()) throw std::invalid_argument("initial state must be nonnegative");
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
    const std::vector<Equilibrium> eqs = all_equilibria(p);
    Trajectory traj;
    try {
        traj = integrate_impl(p, x0, t_max, opts, eqs);
    } catch (const StepSizeUnderflowError&) {
        // One retry with tightened tolerances; the model is non-stiff away
        // from the extinction funnel, which the event handler owns.
        IntegrateOptions tight = opts;
        tight.rtol = opts.rtol * 1e-2;
        tight.atol = opts.atol * 1e-2;
        traj = integrate_impl(p, x0, t_max, tight, eqs);
    }
    scan_i_extinction(p, traj, t_max);
    return traj;
}

std::vector<State> integrate_fixed(const ParamSet& p, const State& x0, double t_max,
                                   int n_steps) {
    Field field{&p, false};
    std::vector<State> out;
    out.reserve(static_cast<std::size_t>(n_steps) + 1);
    Y y{x0.S, x0.I, x0.P};
    out.push_back(x0);
    const double h = t_max / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        const Y k1 = field(y);
        StepResult r = dopri5_step(field, s * h, y, k1, h, 1.0, 1.0);
        y = r.y1;
        out.push_back(State{y[0], y[1], y[2]});
    }
    return out;
}

namespace detail {

Vec3 propagate_linear(const Mat3& A, const Vec3& y0, double t, int n_steps) {
    LinearField f{&A};
    Y y{y0[0], y0[1], y0[2]};
    const double h = t / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        const Y k1 = f(y);
        y = dopri5_step(f, s * h, y, k1, h, 1.0, 1.0).y1;
    }
    return {y[0], y[1], y[2]};
}

} // namespace detail

SelectivePredationCheck check_selective_predation_threshold(const ParamSet& p) {
    const double threshold = (p.e0 * p.K - p.a1 * p.b0) / p.b0;
    return {threshold, p.d1 > threshold};
}

std::optional<double> dissipativity_bound(const ParamSet& p, const State& x0) {
    if (!p.boundedness_precondition()) return std::nullopt;
    const double xi = std::min(p.a1, p.a2);
    if (!(xi > p.a0 - p.b0)) return std::nullopt;
    const double w = p.b0 * p.K / 4.0 * std::pow(1.0 - (p.a0 - xi) / p.b0, 2);
    const double q0 = x0.S + x0.I + x0.P;
    return std::max(q0, w / xi);
}

Event classify_endpoint(const ParamSet& p, const Trajectory& traj, double match_rtol) {
    if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
    for (const auto& ev : traj.events)
        if (ev.kind == EventKind::FTE) return ev;

    const auto& [t_end, final] = traj.samples.back();
    if (final.S == 0.0 && final.I == 0.0 && final.P == 0.0)
        return {EventKind::Converged, t_end, final, "E0"};

    std::vector<const Equilibrium*> matches;
    const std::vector<Equilibrium> eqs = all_equilibria(p);
    for (const auto& e : eqs)
        if (rel_distance(final, e.location) <= match_rtol) matches.push_back(&e);
    if (matches.size() > 1)
        throw AmbiguousEndpointError("endpoint matches two equilibria within tolerance");
    if (matches.size() == 1)
        return {EventKind::Converged, t_end, final, to_string(matches[0]->kind)};

    for (const auto& ev : traj.events)
        if (ev.kind == EventKind::IExtinct) return ev;

    // No match: decide oscillatory vs plain non-convergence from the tail.
    const std::size_t tail = std::max<std::size_t>(traj.samples.size() / 4, 2);
    double lo = std::numeric_limits<double>::max(), hi = -lo;
    for (std::size_t i = traj.samples.size() - tail; i < traj.samples.size(); ++i) {
        lo = std::min(lo, traj.samples[i].second.S);
        hi = std::max(hi, traj.samples[i].second.S);
    }
    const bool oscillatory = hi - lo > 1e-3 * std::max(1.0, hi);
    return {EventKind::Oscillatory, t_end, final, oscillatory ? "oscillatory" : "nonconvergent"};
}

} // namespace sip
