#include "test_support.hpp"

#include "tubeloc/appearance.hpp"
#include "tubeloc/discovery.hpp"
#include "tubeloc/motion.hpp"
#include "tubeloc/synth.hpp"
#include "tubeloc/tube_solver.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace tubeloc;

namespace {

void BM_PhmMatch(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto n = static_cast<std::size_t>(state.range(0));
    const RegionSet q = testing::random_region_set(rng, n, 32);
    const RegionSet c = testing::random_region_set(rng, n, 32);
    const Config config;
    for (auto _ : state) benchmark::DoNotOptimize(phm_match(q, c, config));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PhmMatch)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_PhmOracle(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto n = static_cast<std::size_t>(state.range(0));
    const RegionSet q = testing::random_region_set(rng, n, 32);
    const RegionSet c = testing::random_region_set(rng, n, 32);
    const Config config;
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_phm(q, c, config));
}
BENCHMARK(BM_PhmOracle)->Arg(8)->Arg(20);

void BM_SolveBestTube(benchmark::State& state) {
    const int frames = static_cast<int>(state.range(0));
    const int cands = static_cast<int>(state.range(1));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> indices;
    std::vector<std::vector<Candidate>> unary;
    for (int t = 0; t < frames; ++t) {
        indices.push_back(20 * t);
        std::vector<Candidate> list;
        for (int i = 0; i < cands; ++i) list.push_back(Candidate{i, u(rng)});
        unary.push_back(std::move(list));
    }
    const Trellis trellis = build_trellis(indices, unary, cands, [&](std::size_t, auto a, auto b) {
        std::vector<double> m(a.size() * b.size());
        for (double& x : m) x = u(rng) * 3.0 - 2.0;
        return m;
    });
    for (auto _ : state) benchmark::DoNotOptimize(solve_best_tube(trellis, 2.0));
}
BENCHMARK(BM_SolveBestTube)->Args({5, 100})->Args({20, 100})->Args({50, 200});

void BM_MotionCoherence(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pos(0.0, 320.0);
    std::vector<Track> tracks;
    for (int i = 0; i < state.range(0); ++i) {
        const double x = pos(rng), y = pos(rng) * 0.75;
        tracks.push_back(Track{i, i % 4, 0, {Point2{x, y}, Point2{x, y}}});
    }
    const FrameTrackIndex idx = FrameTrackIndex::build(tracks, 0);
    const Box box{60, 40, 120, 100};
    for (auto _ : state) benchmark::DoNotOptimize(motion_coherence(box, idx));
}
BENCHMARK(BM_MotionCoherence)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RunDiscovery(benchmark::State& state) {
    const SynthCollection synth = generate_collection(SynthSpec{});
    Config config;
    config.threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_discovery(synth.collection, config));
}
BENCHMARK(BM_RunDiscovery)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
