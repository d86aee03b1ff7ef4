#include <dgprm/cftree.hpp>
#include <dgprm/geometry.hpp>
#include <dgprm/mock_backend.hpp>
#include <dgprm/reward_tree.hpp>

#include <benchmark/benchmark.h>

#include <vector>

using namespace dgprm;

namespace {

std::vector<EmbeddingVector> make_points(int n, int d) {
    std::vector<EmbeddingVector> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(mock_embed("bench-" + std::to_string(i), d, 0));
    return out;
}

void BM_CosineDistance(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const auto a = mock_embed("a", d, 0);
    const auto b = mock_embed("b", d, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cosine_distance(a, b));
    }
}
BENCHMARK(BM_CosineDistance)->Arg(64)->Arg(1024)->Arg(4096);

void BM_CFInsert(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto points = make_points(n, 64);
    for (auto _ : state) {
        CFTree tree(CFTreeParams::from_cosine_radius(0.5, 50));
        for (int i = 0; i < n; ++i)
            tree.insert(points[static_cast<size_t>(i)], "p" + std::to_string(i));
        benchmark::DoNotOptimize(tree.total_points());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_CFInsert)->Arg(100)->Arg(1000)->Arg(5000);

void BM_DedupMerge(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::vector<Criterion> cs;
    cs.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Criterion c;
        c.id = "c" + std::to_string(i);
        // Texts round-robin over n/4+1 variants, so merges occur.
        c.text = "criterion " + std::to_string(i % (n / 4 + 1));
        c.embedding = quantize_f32(mock_embed(c.text, 64, 0));
        c.source_ids = {"s" + std::to_string(i)};
        cs.push_back(std::move(c));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(dedup_merge(cs, 0.25));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DedupMerge)->Arg(64)->Arg(256)->Arg(1024);

} // namespace

BENCHMARK_MAIN();
