#include <benchmark/benchmark.h>

#include "qpower/kkt_solver.hpp"
#include "qpower/montecarlo.hpp"
#include "qpower/zpiora.hpp"

using namespace qpower;

namespace {

SystemConfig config_for(const benchmark::State& state) {
    return SystemConfig::from_db(0.25, 10.0, 0.0, static_cast<int>(state.range(0)));
}

void BM_SolveCodebook(benchmark::State& state) {
    const auto cfg = config_for(state);
    const Multipliers m{0.05, 0.3};
    for (auto _ : state) benchmark::DoNotOptimize(solve_codebook(m, cfg));
}
BENCHMARK(BM_SolveCodebook)->Arg(2)->Arg(4)->Arg(6);

void BM_EvaluateLayout(benchmark::State& state) {
    const auto cfg = config_for(state);
    const auto sol = solve_optimal_qpa(cfg);
    const auto layout = sol.layout(cfg);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_layout(layout, cfg));
}
BENCHMARK(BM_EvaluateLayout)->Arg(2)->Arg(6)->Arg(10);

void BM_SolveOptimal(benchmark::State& state) {
    const auto cfg = config_for(state);
    for (auto _ : state) benchmark::DoNotOptimize(solve_optimal_qpa(cfg));
}
BENCHMARK(BM_SolveOptimal)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveZpiora(benchmark::State& state) {
    const auto cfg = config_for(state);
    for (auto _ : state) benchmark::DoNotOptimize(solve_zpiora(cfg));
}
BENCHMARK(BM_SolveZpiora)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
    const auto cfg = SystemConfig::from_db(0.25, 10.0, 0.0, 4);
    const auto layout = solve_optimal_qpa(cfg).layout(cfg);
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_performance(layout, cfg, n, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
