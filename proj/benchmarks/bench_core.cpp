#include <cmath>

#include <benchmark/benchmark.h>

#include "bbmnet/bbmnet.hpp"

using namespace bbmnet;

namespace {

MeshPtr three_edges(int cells) {
    return build_mesh(StarNetwork({1.0, std::sqrt(2.0), std::sqrt(3.0)}, 2.0), cells);
}

NetworkFunction bump(const MeshPtr& mesh) {
    return NetworkFunction::interpolate(mesh, [&](std::size_t j, double x) {
        const double l = mesh->network().length(j);
        return std::sin(M_PI * x / l) * std::exp(-x) + 0.2 * (1.0 - x / l);
    });
}

void BM_Assemble(benchmark::State& state) {
    const auto mesh = three_edges(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assemble)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

void BM_TimeDerivative(benchmark::State& state) {
    const auto mesh = three_edges(static_cast<int>(state.range(0)));
    const BbmDynamics dyn(mesh, Model::Nonlinear);
    const Vector u = bump(mesh).coefficients();
    for (auto _ : state) benchmark::DoNotOptimize(dyn.time_derivative(u));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TimeDerivative)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

void BM_MidpointStep(benchmark::State& state) {
    const auto mesh = three_edges(static_cast<int>(state.range(0)));
    const BbmDynamics dyn(mesh, Model::Nonlinear);
    const Vector u = bump(mesh).coefficients();
    for (auto _ : state) benchmark::DoNotOptimize(step_midpoint(dyn, u, 1e-2));
}
BENCHMARK(BM_MidpointStep)->RangeMultiplier(4)->Range(64, 4096);

void BM_Rk4Step(benchmark::State& state) {
    const auto mesh = three_edges(static_cast<int>(state.range(0)));
    const BbmDynamics dyn(mesh, Model::Nonlinear);
    const Vector u = bump(mesh).coefficients();
    for (auto _ : state) benchmark::DoNotOptimize(step_rk4(dyn, u, 1e-2));
}
BENCHMARK(BM_Rk4Step)->RangeMultiplier(4)->Range(64, 4096);

void BM_Spectrum(benchmark::State& state) {
    const auto mesh = build_mesh(StarNetwork({1.0, 1.0, std::sqrt(2.0)}, 2.0), static_cast<int>(state.range(0)));
    const auto mats = assemble(mesh);
    const auto modes = imaginary_axis_modes(mesh->network(), {}, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(discrete_spectrum(discrete_generator(mats, 2.0), mats.energy, modes));
    }
}
BENCHMARK(BM_Spectrum)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
    const StarNetwork net({1.0, std::sqrt(2.0), std::sqrt(3.0), M_PI, std::exp(1.0), 1.7}, 4.0);
    for (auto _ : state) benchmark::DoNotOptimize(classify_stability(net));
}
BENCHMARK(BM_Classify);

}  // namespace

BENCHMARK_MAIN();
