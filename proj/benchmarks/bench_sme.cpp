#include <benchmark/benchmark.h>

#include "lornz/master_engine.hpp"

using namespace lornz;

namespace {

DensityMatrix start_state(Index d0, Index d1) {
    return tensor_product(coherent_state(d0, 0.7), fock_state(d1, 0));
}

}  // namespace

static void BM_LindbladApply(benchmark::State& state) {
    const Index d = state.range(0);
    const CompiledGenerator gen(probed_slh(ModelParams::paper_example(), {d, d}), kProbeChannel);
    const CMatrix rho = start_state(d, d).matrix();
    CMatrix out;
    for (auto _ : state) {
        gen.lindblad(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_LindbladApply)->Arg(6)->Arg(12)->Arg(16);

static void BM_SmeTrajectory(benchmark::State& state) {
    const Index d = state.range(0);
    const auto scheme = static_cast<SMEScheme>(state.range(1));
    const CompiledGenerator gen(probed_slh(ModelParams::paper_example(), {d, d}), kProbeChannel);
    const DensityMatrix rho0 = start_state(d, d);
    SMEConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 200;
    cfg.scheme = scheme;
    cfg.positivity_check_every = 1000;
    std::uint64_t stream = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_sme_trajectory(gen, rho0, cfg, stream++, {}, 200));
    state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_SmeTrajectory)
    ->Args({8, static_cast<int>(SMEScheme::EulerMaruyama)})
    ->Args({8, static_cast<int>(SMEScheme::PositiveMap)})
    ->Args({12, static_cast<int>(SMEScheme::EulerMaruyama)})
    ->Args({12, static_cast<int>(SMEScheme::PositiveMap)})
    ->Unit(benchmark::kMillisecond);
