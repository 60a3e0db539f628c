#include <benchmark/benchmark.h>

#include "sip/continuation.hpp"
#include "sip/dynamics.hpp"
#include "sip/equilibria.hpp"
#include "sip/stability.hpp"

namespace {

const sip::ParamSet kParams{.b0 = 2, .r = 0.7, .e0 = 0.5, .K = 8, .a0 = 0.3, .a1 = 0.4,
                            .a2 = 0.8, .d0 = 0.6, .d1 = 0.7, .d2 = 0.3, .d3 = 0.5,
                            .k1 = 1.2, .k2 = 0.85};
const sip::State kState{2.5, 0.46, 0.61};

void FieldEvaluation(benchmark::State& state) {
    for (auto _ : state) {
        auto g = sip::vector_field(kParams, kState);
        benchmark::DoNotOptimize(g);
    }
}
BENCHMARK(FieldEvaluation);

void AnalyticJacobian(benchmark::State& state) {
    for (auto _ : state) {
        auto J = sip::jacobian(kParams, kState);
        benchmark::DoNotOptimize(J);
    }
}
BENCHMARK(AnalyticJacobian);

void EigenvalueClassification(benchmark::State& state) {
    const sip::Mat3 J = sip::jacobian(kParams, kState);
    for (auto _ : state) {
        auto rep = sip::classify_jacobian(J);
        benchmark::DoNotOptimize(rep);
    }
}
BENCHMARK(EigenvalueClassification);

void InteriorEquilibriumSolve(benchmark::State& state) {
    for (auto _ : state) {
        auto roots = sip::equilibrium_E4(kParams);
        benchmark::DoNotOptimize(roots);
    }
}
BENCHMARK(InteriorEquilibriumSolve);

void IntegrateHorizon(benchmark::State& state) {
    const sip::State x0{0.8, 0.9, 1.1};
    for (auto _ : state) {
        auto traj = sip::integrate(kParams, x0, static_cast<double>(state.range(0)));
        benchmark::DoNotOptimize(traj);
    }
}
BENCHMARK(IntegrateHorizon)->Arg(50)->Arg(500);

void BranchContinuation(benchmark::State& state) {
    const auto seed = sip::equilibrium_E4(kParams)[0];
    for (auto _ : state) {
        auto branch = sip::continue_branch(kParams, "k1", {0.05, 3.0}, seed);
        benchmark::DoNotOptimize(branch);
    }
}
BENCHMARK(BranchContinuation);

} // namespace

BENCHMARK_MAIN();
