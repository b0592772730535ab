#include <benchmark/benchmark.h>

#include "lornz/gaussian_filter.hpp"

using namespace lornz;

static void BM_SimulateRecord(benchmark::State& state) {
    const QuadratureModel q = quadrature_realization(ModelParams::paper_example());
    RecordConfig rc;
    rc.dt = 1e-2;
    rc.steps = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_record(q, Eigen::Vector4d(1.0, 0.0, 0.0, 0.0), rc));
        ++rc.stream;
    }
    state.SetItemsProcessed(state.iterations() * rc.steps);
}
BENCHMARK(BM_SimulateRecord)->Arg(2000)->Arg(20000);

static void BM_KalmanFilter(benchmark::State& state) {
    const QuadratureModel q = quadrature_realization(ModelParams::paper_example());
    const KalmanMatrices km = kalman_matrices(q);
    RecordConfig rc;
    rc.dt = 1e-2;
    rc.steps = state.range(0);
    const Eigen::Vector4d m0(1.0, 0.0, 0.0, 0.0);
    const MeasurementRecord rec = simulate_record(q, m0, rc);
    const GainSchedule schedule = riccati_trajectory(q, km, 0.5 * Eigen::Matrix4d::Identity(), rc.dt, rc.steps);
    for (auto _ : state) benchmark::DoNotOptimize(kalman_filter(q, km, rec, m0, schedule));
    state.SetItemsProcessed(state.iterations() * rc.steps);
}
BENCHMARK(BM_KalmanFilter)->Arg(2000)->Arg(20000);

static void BM_RiccatiStationary(benchmark::State& state) {
    const QuadratureModel q = quadrature_realization(ModelParams::paper_example());
    const KalmanMatrices km = kalman_matrices(q);
    for (auto _ : state) benchmark::DoNotOptimize(riccati_stationary(q, km));
}
BENCHMARK(BM_RiccatiStationary)->Unit(benchmark::kMillisecond);

static void BM_MemoryKernelMean(benchmark::State& state) {
    const auto t = uniform_grid(1e-3, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(memory_kernel_mean(ModelParams::paper_example(), 1.0, t));
}
BENCHMARK(BM_MemoryKernelMean)->Arg(20000);
