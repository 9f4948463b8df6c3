#include <benchmark/benchmark.h>

#include <memory>

#include "rslookback/ham.hpp"
#include "rslookback/monte_carlo.hpp"

namespace rl = rslookback;

namespace {

rl::ValidatedModel bench_model() {
    rl::MarketModel m;
    m.regime1 = {0.05, 0.2, {}};
    m.regime2 = {0.03, 0.3, {}};
    m.lambda12 = 1.0;
    m.lambda21 = 1.0;
    return rl::validate_model(m);
}

void propagator_build(benchmark::State& state, rl::Execution exec) {
    const auto vm = bench_model();
    const rl::NumericsConfig cfg;
    const double z_max = rl::truncated_z_max(0.0, 1.0, vm, cfg.z_max_sigmas);
    auto axes = std::make_shared<const rl::TermAxes>(1.0, z_max, static_cast<std::size_t>(state.range(0)),
                                                     static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        rl::GreenPropagator prop(vm.regime(rl::Regime::One), axes, cfg, exec);
        benchmark::DoNotOptimize(prop.weights().data());
    }
    state.counters["rows"] = static_cast<double>(axes->size());
}

void mc(benchmark::State& state, rl::Execution exec) {
    const auto vm = bench_model();
    const rl::LookbackQuery q{100.0, 100.0, 0.0, 1.0, rl::Regime::One, rl::OptionStyle::FloatingStrikePut, 0.0};
    rl::McConfig cfg;
    cfg.n_paths = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rl::mc_price(q, vm, cfg, exec));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(propagator_build, serial, rl::Execution::Serial)->Args({16, 20})->Args({32, 40})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(propagator_build, openmp, rl::Execution::Parallel)->Args({16, 20})->Args({32, 40})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(mc, serial, rl::Execution::Serial)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(mc, openmp, rl::Execution::Parallel)->Arg(100'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
