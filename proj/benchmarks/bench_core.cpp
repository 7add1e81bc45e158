#include <benchmark/benchmark.h>

#include <gptcloak/cloaking.hpp>
#include <gptcloak/design.hpp>
#include <gptcloak/gpt.hpp>

using namespace gptcloak;

namespace {

RadialLayeredStructure alternating(int order) {
    const std::vector<double> radii = default_radii(order);
    std::vector<double> sigma(radii.size());
    for (std::size_t j = 0; j < sigma.size(); ++j) sigma[j] = j % 2 == 0 ? 0.5 : 2.0;
    return {radii, sigma, 1.0};
}

void BM_GptSpectrum(benchmark::State& state) {
    const RadialLayeredStructure s = alternating(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gpt_spectrum(s, 50));
    state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_GptSpectrum)->Arg(3)->Arg(9)->Arg(30);

void BM_ScaledJacobian(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    const DesignProblem p = DesignProblem::with_default_radii(order, CoreConstraint::free());
    const std::vector<double> sigma = initial_guess(p);
    for (auto _ : state) benchmark::DoNotOptimize(scaled_jacobian(p, sigma));
}
BENCHMARK(BM_ScaledJacobian)->Arg(3)->Arg(9)->Arg(20);

void BM_SolveDesign(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    const CoreConstraint core = state.range(1) == 0 ? CoreConstraint::free() : CoreConstraint::insulated();
    const DesignProblem p = DesignProblem::with_default_radii(order, core);
    for (auto _ : state) benchmark::DoNotOptimize(solve_design(p));
}
BENCHMARK(BM_SolveDesign)->Args({3, 0})->Args({6, 0})->Args({9, 0})->Args({6, 1})->Unit(benchmark::kMicrosecond);

void BM_OperatorNorm(benchmark::State& state) {
    const RadialLayeredStructure s = alternating(6);
    for (auto _ : state) benchmark::DoNotOptimize(operator_norm_estimate(s, 0.1, 2.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_OperatorNorm)->Arg(50)->Arg(200);

void BM_PushforwardGrid(benchmark::State& state) {
    const RadialLayeredStructure s = alternating(6);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        double acc = 0.0;
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const Point2 p{-2.0 + 4.0 * ix / (n - 1), -2.0 + 4.0 * iy / (n - 1)};
                if (p.norm() > 2.0) continue;
                if (const auto a = pushforward_tensor(s, 0.1, p)) acc += a->a11;
            }
        }
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_PushforwardGrid)->Arg(101)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
