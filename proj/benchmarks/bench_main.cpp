#include <random>

#include <benchmark/benchmark.h>

#include "fishbone/experiment.hpp"

using namespace fishbone;

namespace {

PlanarTopology topology_of(std::size_t parents) {
    PoissonClusterParams p = default_topology_params();
    p.n_parents = parents;
    return generate_poisson_cluster(p);
}

void BM_Upgma(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto m = DissimilarityMatrix::euclidean(pts);
    for (auto _ : state) benchmark::DoNotOptimize(upgma(m, 3));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Upgma)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_Plan(benchmark::State& state) {
    const auto topo = topology_of(static_cast<std::size_t>(state.range(0)));
    const RadioModel radio(calibrate_range(topo, 0.9));
    const DeviceId src = topo.at(0).id;
    for (auto _ : state) benchmark::DoNotOptimize(build_fishbone_plan(topo, radio, src));
    state.counters["devices"] = static_cast<double>(topo.size());
}
BENCHMARK(BM_Plan)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    const auto prep = prepare_topology(ExperimentConfig{});
    const UnitDiskGraph graph(prep.topology, prep.radio);
    const DeviceId src = prep.topology.at(0).id;
    std::shared_ptr<const Strategy> strategy;
    switch (state.range(0)) {
        case 0: strategy = epidemic_strategy(); break;
        case 1: strategy = modified_bip_strategy(); break;
        case 2: strategy = pf_strategy(0.5); break;
        default: strategy = fifo_strategy(std::make_shared<FishbonePlan>(build_fishbone_plan(prep.topology, graph, src)));
    }
    SimOptions opt;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(prep.topology, graph, *strategy, src, opt));
        ++opt.seed;
    }
}
BENCHMARK(BM_Simulate)->DenseRange(0, 3)->ArgName("strategy")->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
