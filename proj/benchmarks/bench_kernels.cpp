#include <benchmark/benchmark.h>

#include "overseg/loss.hpp"
#include "overseg/nn/layers.hpp"
#include "overseg/nn/unet.hpp"
#include "overseg/rng.hpp"
#include "overseg/synth.hpp"

using namespace overseg;

namespace {

nn::Tensor<float> random_tensor(std::vector<int> shape, std::uint64_t seed) {
    nn::Tensor<float> t(std::move(shape));
    Xoshiro256 rng(seed);
    for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return t;
}

void BM_Conv3x3Forward(benchmark::State& state) {
    const int c_in = static_cast<int>(state.range(0)), c_out = static_cast<int>(state.range(1));
    const int side = static_cast<int>(state.range(2));
    auto input = random_tensor({c_in, side, side}, 1);
    auto kernel = random_tensor({c_out, c_in, 3, 3}, 2);
    nn::Tensor<float> bias({c_out});
    for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_forward(input, kernel, bias));
    state.SetItemsProcessed(state.iterations() * 2LL * c_out * c_in * 9 * side * side);
}
BENCHMARK(BM_Conv3x3Forward)->Args({1, 16, 28})->Args({16, 16, 28})->Args({32, 32, 14})->Args({64, 64, 7})->Args({64, 32, 14});

void BM_Conv3x3Backward(benchmark::State& state) {
    const int c_in = static_cast<int>(state.range(0)), c_out = static_cast<int>(state.range(1));
    const int side = static_cast<int>(state.range(2));
    auto input = random_tensor({c_in, side, side}, 1);
    auto kernel = random_tensor({c_out, c_in, 3, 3}, 2);
    auto grad = random_tensor({c_out, side, side}, 3);
    for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_backward(input, kernel, grad));
    state.SetItemsProcessed(state.iterations() * 4LL * c_out * c_in * 9 * side * side);
}
BENCHMARK(BM_Conv3x3Backward)->Args({16, 16, 28})->Args({64, 32, 14});

void BM_UNetForward(benchmark::State& state) {
    nn::UNetConfig config;
    const auto params = nn::init_params(config, 1);
    auto input = random_tensor({1, 28, 28}, 4);
    for (float& v : input.data()) v = std::abs(v);
    for (auto _ : state) benchmark::DoNotOptimize(nn::unet_forward(params, config, input));
}
BENCHMARK(BM_UNetForward)->Unit(benchmark::kMicrosecond);

void BM_UNetTrainStep(benchmark::State& state) {
    nn::UNetConfig config;
    const auto params = nn::init_params(config, 1);
    auto input = random_tensor({1, 28, 28}, 4);
    for (float& v : input.data()) v = std::abs(v);
    nn::Tensor<float> targets({5, 28, 28});
    for (std::size_t i = 0; i < targets.size(); i += 7) targets[i] = 1.0f;
    for (auto _ : state) {
        nn::UNetCache<float> cache;
        const auto probs = nn::unet_forward(params, config, input, &cache);
        const auto bce = bce_loss(probs, targets);
        benchmark::DoNotOptimize(nn::unet_backward(params, config, cache, bce.grad));
    }
}
BENCHMARK(BM_UNetTrainStep)->Unit(benchmark::kMicrosecond);

void BM_MakeSample(benchmark::State& state) {
    Xoshiro256 rng(3);
    ClassPool pool(5);
    for (int c = 0; c < 5; ++c)
        for (int i = 0; i < 20; ++i) {
            GrayImage img(28, 28);
            for (int y = 6; y < 22; ++y)
                for (int x = 8 + c; x < 12 + c; ++x) img.at(y, x) = static_cast<float>(rng.uniform(0.6, 1.0));
            pool[c].push_back({c, img, binarize_mask(img, 0.5)});
        }
    SynthConfig config;
    config.noise_sigma = 0.05;
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(make_sample(pool, config, derive_seed(7, seed++)));
}
BENCHMARK(BM_MakeSample)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
