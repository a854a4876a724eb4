// Micro-benchmarks for the hot paths: Haar analysis/synthesis, the fused
// selective scan, and dense convolution.

#include <benchmark/benchmark.h>

#include "cawm/nn.hpp"
#include "cawm/random.hpp"
#include "cawm/ssm.hpp"
#include "cawm/wavelet.hpp"

namespace {

cawm::Tensor<float> random_tensor(cawm::Shape s, uint64_t seed) {
    cawm::Rng rng(seed);
    cawm::Tensor<float> t = cawm::Tensor<float>::zeros(s);
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1, 1));
    return t;
}

void BM_dwt2(benchmark::State& state) {
    const int64_t side = state.range(0);
    auto x = random_tensor({1, 8, side, side}, 1);
    for (auto _ : state) {
        auto p = cawm::dwt2(x);
        benchmark::DoNotOptimize(p.ll.data());
    }
}
BENCHMARK(BM_dwt2)->Arg(32)->Arg(64)->Arg(128);

void BM_idwt2(benchmark::State& state) {
    const int64_t side = state.range(0);
    auto x = random_tensor({1, 8, side, side}, 2);
    auto p = cawm::dwt2(x);
    for (auto _ : state) {
        auto y = cawm::idwt2(p);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_idwt2)->Arg(32)->Arg(64)->Arg(128);

void BM_selective_scan(benchmark::State& state) {
    const int64_t L = state.range(0);
    const int64_t B = 1, C = 8, N = 8;
    auto x = random_tensor({B, C, L, 1}, 3);
    auto delta = random_tensor({B, C, L, 1}, 4);
    for (auto& v : delta.data()) v = 0.1f + std::abs(v);
    auto bm = random_tensor({B, N, L, 1}, 5);
    auto cm = random_tensor({B, N, L, 1}, 6);
    auto a_log = random_tensor({C, N, 1, 1}, 7);
    auto d_skip = random_tensor({1, C, 1, 1}, 8);
    for (auto _ : state) {
        auto y = cawm::selective_scan(x, delta, bm, cm, a_log, d_skip);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_selective_scan)->Arg(256)->Arg(1024)->Arg(4096);

void BM_conv2d(benchmark::State& state) {
    const int64_t side = state.range(0);
    auto x = random_tensor({1, 16, side, side}, 9);
    auto w = random_tensor({16, 16, 3, 3}, 10);
    for (auto _ : state) {
        auto y = cawm::conv2d(x, w, 1, 1);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_conv2d)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
