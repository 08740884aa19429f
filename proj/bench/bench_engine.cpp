// Serial reference (stored paths, fit, price) against the streaming OpenMP engine.

#include <benchmark/benchmark.h>

#include "../tests/support.hpp"

using namespace cva;

namespace {

const test::Setting& setting() {
    static const test::Setting s(test::kHM);
    return s;
}

std::vector<Portfolio> vanilla() {
    const auto& c = test::market_curve();
    return {make_portfolio("P1", c), make_portfolio("P2", c), make_portfolio("P3", c)};
}

void serial_reference(benchmark::State& state) {
    const auto& s = setting();
    const auto sim = s.simulator({-0.6, 0.0, 0.0});
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto portfolios = vanilla();
    for (auto _ : state) {
        const auto ps = simulate(sim, n, 1);
        for (const auto& p : portfolios) {
            const PortfolioEvaluator ev(p, s.g2, s.grid);
            benchmark::DoNotOptimize(bilateral_cva(ps, fit_regression(ps, ev, s.g2), ev, {}));
        }
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void openmp_engine(benchmark::State& state) {
    const auto sim = setting().simulator({-0.6, 0.0, 0.0});
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto portfolios = vanilla();
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_cva(sim, portfolios, {}, n, 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(serial_reference)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(openmp_engine)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
