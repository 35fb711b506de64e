#include <benchmark/benchmark.h>

#include <random>

#include "buck/harness.hpp"
#include "buck/neural.hpp"
#include "buck/parallel.hpp"

using namespace buck;

namespace {

Dataset synthetic_dataset(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = u(rng), ed = 1000.0 * u(rng);
        d.rows.push_back({e, ed, 1.5e8 - 2e7 * e});
    }
    return d;
}

struct GradientFixture {
    Mlp net;
    StandardizedData data;

    explicit GradientFixture(std::size_t n) : net(Mlp::create({2, 3, 3, 1}, Activation::relu, 3)) {
        const Dataset d = synthetic_dataset(n);
        net.normalization = fit_normalization(d);
        data = standardize(d, net.normalization);
    }
};

void BM_GradientSerial(benchmark::State& state) {
    const GradientFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(batch_gradient_serial(f.net, f.data));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradientParallel(benchmark::State& state) {
    const GradientFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(f.net, f.data));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepSerial(benchmark::State& state) {
    const Dataset d = synthetic_dataset(4000);
    for (auto _ : state) benchmark::DoNotOptimize(hyperparameter_sweep_serial(d, 10, 42));
}

void BM_SweepParallel(benchmark::State& state) {
    const Dataset d = synthetic_dataset(4000);
    for (auto _ : state) benchmark::DoNotOptimize(hyperparameter_sweep(d, 10, 42));
}

DatasetOptions short_runs(std::vector<Scenario>& scenarios) {
    scenarios = default_dataset_scenarios(ConverterParams{}, 0.01, 0.005);
    return DatasetOptions{};
}

void BM_DatasetSerial(benchmark::State& state) {
    std::vector<Scenario> s;
    const DatasetOptions opt = short_runs(s);
    for (auto _ : state) benchmark::DoNotOptimize(generate_dataset_serial(s, opt));
}

void BM_DatasetParallel(benchmark::State& state) {
    std::vector<Scenario> s;
    const DatasetOptions opt = short_runs(s);
    for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(s, opt));
}

std::vector<Experiment> short_experiments() { return default_experiments(ConverterParams{}, 0.01, 0.005); }

DnnSmcController bench_dnn() {
    DnnSmcController c;
    c.net = Mlp::create({2, 3, 3, 1}, Activation::relu, 5);
    c.net.normalization = fit_normalization(synthetic_dataset(100));
    return c;
}

void BM_CompareSerial(benchmark::State& state) {
    const auto exps = short_experiments();
    const DnnSmcController dnn = bench_dnn();
    for (auto _ : state) benchmark::DoNotOptimize(compare_controllers_serial(exps, ClassicSmcController{}, dnn));
}

void BM_CompareParallel(benchmark::State& state) {
    const auto exps = short_experiments();
    const DnnSmcController dnn = bench_dnn();
    for (auto _ : state) benchmark::DoNotOptimize(compare_controllers(exps, ClassicSmcController{}, dnn));
}

}  // namespace

BENCHMARK(BM_GradientSerial)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientParallel)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DatasetSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatasetParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CompareSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CompareParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
