// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/solarinv_bench --benchmark_filter=MonteCarlo
//
// Set OMP_NUM_THREADS to control the thread count of the parallel variants.

#include <benchmark/benchmark.h>

#include <vector>

#include "solarinv/simulator.hpp"
#include "solarinv/sweep.hpp"
#include "solarinv/value_function.hpp"

using namespace solarinv;

namespace {

const ValueFunction& model() {
    static const ValueFunction vf = [] {
        ModelParams p = table_preset();
        p.mu = 1.4;
        FundamentalSolution fs(validate(p));
        return ValueFunction(fs, solve_boundary(fs));
    }();
    return vf;
}

McSettings mc_settings(benchmark::State& st) {
    McSettings s;
    s.n_paths = st.range(0);
    s.dt = 0.02;
    return s;
}

template <auto Estimator>
void MonteCarlo(benchmark::State& st) {
    const auto& vf = model();
    const auto s = mc_settings(st);
    const State x0 = default_probe_states(vf.boundary())[1];
    for (auto _ : st) {
        benchmark::DoNotOptimize(Estimator(vf.params(), vf.boundary(), Policy::optimal(), x0, s).estimate);
    }
    st.SetItemsProcessed(st.iterations() * s.n_paths);
}

template <auto Grid>
void HjbGrid(benchmark::State& st) {
    const auto& vf = model();
    const auto n = static_cast<int>(st.range(0));
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) xs.push_back(-1.0 + 4.0 * i / n);
    for (int j = 0; j < n; ++j) ys.push_back(4.9 * j / n);
    for (auto _ : st) benchmark::DoNotOptimize(Grid(vf, xs, ys).data());
    st.SetItemsProcessed(st.iterations() * n * n);
}

template <auto Sweep>
void Sweeps(benchmark::State& st) {
    SweepSpec spec;
    spec.param = "sigma";
    spec.values = {0.5, 0.6, 0.7, 0.8};
    for (auto _ : st) benchmark::DoNotOptimize(Sweep(spec, 201).verdict);
}

}  // namespace

BENCHMARK(MonteCarlo<estimate_value_serial>)->Name("MonteCarlo/serial")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(MonteCarlo<estimate_value>)->Name("MonteCarlo/openmp")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(HjbGrid<hjb_grid_serial>)->Name("HjbGrid/serial")->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(HjbGrid<hjb_grid>)->Name("HjbGrid/openmp")->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(Sweeps<run_sweep_serial>)->Name("Sweep/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(Sweeps<run_sweep>)->Name("Sweep/openmp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
