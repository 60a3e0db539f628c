#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sip/equilibria.hpp"
#include "sip/model.hpp"

namespace sip {

enum class EventKind { FTE, Converged, IExtinct, BoundViolation, Oscillatory };

const char* to_string(EventKind k);

struct Event {
    EventKind kind;
    double time = 0.0;
    State state{};
    std::string detail; ///< e.g. matched equilibrium kind for Converged
};

enum class Termination { MaxTime, Fte, Converged, BoundViolation };

const char* to_string(Termination t);

struct Trajectory {
    std::vector<std::pair<double, State>> samples; ///< strictly increasing t
    std::vector<Event> events;
    Termination terminated_by = Termination::MaxTime;
};

struct IntegrateOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    int output_samples = 2000;
    /// Numerical extinction threshold for S. The exact solution reaches 0 in
    /// finite time; floating-point integration needs a positive cutoff. The
    /// reported t* is the first crossing, bisected to 1e-6 in time.
    double eps_ext = 1e-6;
    /// After an FTE event, continue on the reduced (I, P) subsystem with
    /// S identically 0 instead of stopping.
    bool continue_after_fte = false;
    /// Stop as soon as a Converged event is confirmed.
    bool stop_on_converged = false;
    /// Enforce the nonnegativity and dissipativity monitors while stepping.
    bool monitor_bounds = true;
    double max_step = 0.0; ///< 0 = unlimited
    double event_time_tol = 1e-6;
    /// Convergence detection: ||G||_inf below gtol at conv_window consecutive
    /// output samples, with the state matching a computed equilibrium.
    double conv_gtol = 1e-8;
    int conv_window = 10;
    double endpoint_match_rtol = 1e-3;
};

/// Integrates the model with an adaptive embedded Runge-Kutta 5(4) pair and
/// dense output. Events: finite-time extinction of S (bisected on the dense
/// output), convergence onto a computed equilibrium, sustained extinction of
/// I, and monitor violations. Integration stops at FTE -- the field loses
/// Lipschitz continuity there -- unless opts.continue_after_fte selects the
/// reduced subsystem.
/// Throws StepSizeUnderflowError if the controller stalls even after one
/// retry with tightened tolerances.
Trajectory integrate(const ParamSet& p, const State& x0, double t_max,
                     const IntegrateOptions& opts = {});

/// Fixed-step variant of the same 5th-order stepper; no events, no control.
/// Exists for order-measurement tests and benchmarks.
std::vector<State> integrate_fixed(const ParamSet& p, const State& x0, double t_max, int n_steps);

namespace detail {
/// Fixed-step run of the 5th-order stepper on y' = A y; order-measurement hook.
Vec3 propagate_linear(const Mat3& A, const Vec3& y0, double t, int n_steps);
} // namespace detail

struct SelectivePredationCheck {
    double threshold;       ///< (e0 K - a1 b0)/b0
    bool predicted_extinct; ///< d1 > threshold (sufficient, not necessary)
};

/// Infection-extinction threshold on the predator attack rate d1.
SelectivePredationCheck check_selective_predation_threshold(const ParamSet& p);

/// Matches the final state of a terminated trajectory against the computed
/// equilibria (relative tolerance opts), or reports FTE / sustained
/// I-extinction / oscillatory non-convergence. The stationary origin is
/// reported as Converged with detail "E0".
/// Throws AmbiguousEndpointError when two equilibria match.
Event classify_endpoint(const ParamSet& p, const Trajectory& traj, double match_rtol = 1e-3);

/// Dissipativity bound from the summed system: with xi = min(a1, a2) and
/// W = (b0 K / 4)(1 - (a0 - xi)/b0)^2, every trajectory obeys
/// S+I+P <= max(Q(0), W/xi) + slack. Requires d2 < d0, d3 < d1 and
/// xi > a0 - b0; returns nullopt otherwise.
std::optional<double> dissipativity_bound(const ParamSet& p, const State& x0);

} // namespace sip
