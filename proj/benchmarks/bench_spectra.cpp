#include <benchmark/benchmark.h>

#include "lornz/spectra.hpp"

using namespace lornz;

static void BM_G2Curve(benchmark::State& state) {
    const auto grid = frequency_grid(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(g2_curve(ModelParams::paper_example(), grid));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_G2Curve)->Arg(4096)->Arg(65536);

static void BM_TransferStateSpace(benchmark::State& state) {
    const ModelParams p = ModelParams::paper_example();
    double w = -5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(transfer_functions_state_space(w, p));
        w = w > 5.0 ? -5.0 : w + 1e-3;
    }
}
BENCHMARK(BM_TransferStateSpace);

static void BM_KernelSpectrumFft(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(kernel_spectrum_fft(10.0, 0.6, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_KernelSpectrumFft)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);
