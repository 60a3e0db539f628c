#include "sip/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sip/errors.hpp"

namespace sip {

void ParamSet::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("parameter ") + name +
                                        " must be strictly positive");
    };
    positive(b0, "b0");
    positive(e0, "e0");
    positive(K, "K");
    positive(a0, "a0");
    positive(a1, "a1");
    positive(a2, "a2");
    positive(d0, "d0");
    positive(d1, "d1");
    positive(d2, "d2");
    positive(d3, "d3");
    if (!(r > 0.0 && r < 1.0))
        throw std::invalid_argument("aggregation exponent r must lie in (0, 1)");
    if (!(k1 >= 0.0) || !std::isfinite(k1) || !(k2 >= 0.0) || !std::isfinite(k2))
        throw std::invalid_argument("fear levels k1, k2 must be nonnegative");
}

double VectorFieldValue::max_abs() const {
    return std::max({std::fabs(dS), std::fabs(dI), std::fabs(dP)});
}

double fear(double k, double P) { return 1.0 / (1.0 + k * P); }

double pow_r(double S, double r) {
    if (S <= 0.0) return 0.0; // 0^r = 0; tiny negatives from roundoff collapse too
    return std::exp(r * std::log(S));
}

VectorFieldValue vector_field(const ParamSet& p, const State& x) {
    const double S = x.S, I = x.I, P = x.P;
    const double f1 = fear(p.k1, P);
    const double f2 = fear(p.k2, P);
    const double Sr = pow_r(S, p.r);
    const double dS = p.b0 * S * f1 * (1.0 - (S + I) / p.K) - p.a0 * S - p.d0 * Sr * P -
                      p.e0 * S * I * f2;
    const double dI = -p.a1 * I + p.e0 * S * I * f2 - p.d1 * I * P;
    const double dP = -p.a2 * P + p.d2 * Sr * P + p.d3 * I * P;
    return {dS, dI, dP};
}

Mat3 jacobian(const ParamSet& p, const State& x) {
    if (!(x.S > 0.0))
        throw SingularStateError("jacobian undefined at S = 0: S^(r-1) terms are singular");
    const double S = x.S, I = x.I, P = x.P;
    const double f1 = fear(p.k1, P);
    const double f2 = fear(p.k2, P);
    const double Sr = pow_r(S, p.r);
    const double Srm1 = Sr / S;

    Mat3 J;
    J(0, 0) = p.b0 * (p.K - 2.0 * S - I) / p.K * f1 - p.a0 - p.r * p.d0 * Srm1 * P -
              p.e0 * I * f2;
    J(0, 1) = -p.b0 * S / p.K * f1 - p.e0 * S * f2;
    J(0, 2) = p.k1 * p.b0 * S * (S + I - p.K) / p.K * f1 * f1 - p.d0 * Sr +
              p.k2 * p.e0 * S * I * f2 * f2;
    J(1, 0) = p.e0 * I * f2;
    J(1, 1) = p.e0 * S * f2 - p.a1 - p.d1 * P;
    J(1, 2) = -p.k2 * p.e0 * S * I * f2 * f2 - p.d1 * I;
    J(2, 0) = p.r * p.d2 * Srm1 * P;
    J(2, 1) = p.d3 * P;
    J(2, 2) = -p.a2 + p.d2 * Sr + p.d3 * I;
    return J;
}

namespace {

double* param_ptr(ParamSet& p, std::string_view name) {
    if (name == "b0") return &p.b0;
    if (name == "r") return &p.r;
    if (name == "e0") return &p.e0;
    if (name == "K") return &p.K;
    if (name == "a0") return &p.a0;
    if (name == "a1") return &p.a1;
    if (name == "a2") return &p.a2;
    if (name == "d0") return &p.d0;
    if (name == "d1") return &p.d1;
    if (name == "d2") return &p.d2;
    if (name == "d3") return &p.d3;
    if (name == "k1") return &p.k1;
    if (name == "k2") return &p.k2;
    return nullptr;
}

} // namespace

bool param_exists(std::string_view name) {
    ParamSet dummy{};
    return param_ptr(dummy, name) != nullptr;
}

double param_get(const ParamSet& p, std::string_view name) {
    ParamSet copy = p;
    double* ptr = param_ptr(copy, name);
    if (!ptr) throw ConfigError("unknown parameter name: " + std::string(name));
    return *ptr;
}

void param_set(ParamSet& p, std::string_view name, double value) {
    double* ptr = param_ptr(p, name);
    if (!ptr) throw ConfigError("unknown parameter name: " + std::string(name));
    *ptr = value;
}

VectorFieldValue vector_field_at(const ParamSet& p, std::string_view free, double value,
                                 const State& x) {
    ParamSet q = p;
    param_set(q, free, value);
    return vector_field(q, x);
}

} // namespace sip
