#pragma once

#include <string_view>

#include "sip/linalg.hpp"

namespace sip {

/// The thirteen model parameters. All strictly positive except the fear
/// levels k1, k2, which may be zero. The aggregation exponent r lies in
/// (0, 1); the predation terms use S^r, which is non-Lipschitz at S = 0.
struct ParamSet {
    double b0; ///< birth rate of susceptible prey
    double r;  ///< aggregation exponent, 0 < r < 1
    double e0; ///< disease transmission rate
    double K;  ///< carrying capacity
    double a0; ///< susceptible prey death rate
    double a1; ///< infectious prey death rate
    double a2; ///< predator death rate
    double d0; ///< predator attack rate on susceptible prey
    double d1; ///< predator attack rate on infectious prey
    double d2; ///< conversion efficiency, susceptible prey -> predator
    double d3; ///< conversion efficiency, infectious prey -> predator
    double k1; ///< fear level suppressing prey birth
    double k2; ///< fear level reducing disease transmission

    /// Throws std::invalid_argument on any violated constraint. Call once at
    /// construction; all operations assume a validated set.
    void validate() const;

    /// Uniform boundedness holds under d2 < d0 and d3 < d1.
    bool boundedness_precondition() const { return d2 < d0 && d3 < d1; }
};

/// Population densities. Nonnegative by model invariant.
struct State {
    double S;
    double I;
    double P;

    bool nonnegative() const { return S >= 0.0 && I >= 0.0 && P >= 0.0; }
};

struct VectorFieldValue {
    double dS;
    double dI;
    double dP;

    double max_abs() const;
};

/// Fear factor 1/(1 + k P); equals 1 when either argument is zero and
/// decreases to 0 as k P grows.
double fear(double k, double P);

/// S^r with the limit convention 0^r = 0. Values in [-1e-10, 0) produced by
/// integrator roundoff are treated as 0.
double pow_r(double S, double r);

/// Right-hand side of the model. Total on S >= 0: every term of dS carries a
/// factor S or S^r, so the field is continuous up to the boundary.
VectorFieldValue vector_field(const ParamSet& p, const State& x);

/// Analytic Jacobian of the vector field. Requires S > 0; the S^(r-1) terms
/// make the linearization meaningless at the origin.
/// Throws SingularStateError when S <= 0.
Mat3 jacobian(const ParamSet& p, const State& x);

/// Named access to parameters ("b0", "r", ..., "k2"); used by continuation
/// and sweeps. Throws ConfigError for unknown names.
double param_get(const ParamSet& p, std::string_view name);
void param_set(ParamSet& p, std::string_view name, double value);
bool param_exists(std::string_view name);

/// Vector field with one parameter overridden; avoids copying call sites.
VectorFieldValue vector_field_at(const ParamSet& p, std::string_view free, double value,
                                 const State& x);

} // namespace sip
