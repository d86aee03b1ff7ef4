#include <dgprm/pareto.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace dgprm;

namespace {

ScoreMatrix make_matrix(int n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> sd(1, 10);
    ScoreMatrix m;
    for (int i = 0; i < n; ++i) m.candidate_ids.push_back("c" + std::to_string(i + 1));
    for (int j = 0; j < k; ++j) m.criterion_ids.push_back("r" + std::to_string(j + 1));
    m.values.assign(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(k)));
    for (auto& row : m.values)
        for (auto& v : row) v = sd(rng);
    return m;
}

void BM_ParetoFront(benchmark::State& state) {
    const auto m = make_matrix(static_cast<int>(state.range(0)),
                               static_cast<int>(state.range(1)), 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pareto_front(m));
    }
}
BENCHMARK(BM_ParetoFront)->Args({8, 3})->Args({32, 6})->Args({128, 6})->Args({512, 4});

void BM_BuildPairsPareto(benchmark::State& state) {
    const auto m = make_matrix(static_cast<int>(state.range(0)), 4, 7);
    PairContext ctx;
    ctx.trajectory_id = "t";
    ctx.step_index = 1;
    ctx.prompt = "prompt";
    for (const auto& id : m.candidate_ids) ctx.candidate_texts.push_back("text-" + id);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_pairs_pareto(m, ctx));
    }
}
BENCHMARK(BM_BuildPairsPareto)->Arg(8)->Arg(32)->Arg(128);

void BM_Dominates(benchmark::State& state) {
    const auto m = make_matrix(2, static_cast<int>(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dominates(m.values[0], m.values[1]));
    }
}
BENCHMARK(BM_Dominates)->Arg(2)->Arg(6)->Arg(32);

} // namespace

BENCHMARK_MAIN();
