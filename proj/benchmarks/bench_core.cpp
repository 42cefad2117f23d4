// Microbenchmarks for the hot paths: speckle propagation, the ridge fit, the
// texture generator and the windowed similarity metric. Run with
// --benchmark_min_time=... to tighten or loosen the timing.
#include <benchmark/benchmark.h>

#include "scatterkit/datasets.hpp"
#include "scatterkit/learners.hpp"
#include "scatterkit/media.hpp"
#include "scatterkit/metrics.hpp"
#include "scatterkit/rng.hpp"

using namespace spk;

namespace {

media::TransmissionMedium stock_medium(media::MediumKind kind) {
  media::MediumSpec spec;
  spec.kind = kind;
  spec.in_dims = {16, 16};
  spec.out_dims = {24, 24};
  spec.seed = 3;
  return media::generate_medium(spec);
}

void bm_propagate_linear(benchmark::State& state) {
  const auto medium = stock_medium(media::MediumKind::linear);
  const auto target = datasets::gen_texture(1, {16, 16});
  for (auto _ : state) {
    benchmark::DoNotOptimize(media::propagate(medium, target.values));
  }
}
BENCHMARK(bm_propagate_linear);

void bm_propagate_coherent(benchmark::State& state) {
  const auto medium = stock_medium(media::MediumKind::coherent);
  const auto target = datasets::gen_texture(1, {16, 16});
  for (auto _ : state) {
    benchmark::DoNotOptimize(media::propagate(medium, target.values));
  }
}
BENCHMARK(bm_propagate_coherent);

void bm_gen_texture(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(datasets::gen_texture(++seed, {16, 16}));
  }
}
BENCHMARK(bm_gen_texture);

void bm_gen_digit(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(datasets::gen_digit(++seed, {16, 16}));
  }
}
BENCHMARK(bm_gen_digit);

void bm_train_ridge(benchmark::State& state) {
  const auto medium = stock_medium(media::MediumKind::linear);
  datasets::DatasetSpec spec;
  spec.family = datasets::Family::texture;
  spec.count = static_cast<std::size_t>(state.range(0));
  spec.target_dims = {16, 16};
  spec.seed = 5;
  const auto train = datasets::build_dataset(spec, medium);
  for (auto _ : state) {
    benchmark::DoNotOptimize(learners::train_ridge(train, {}));
  }
}
BENCHMARK(bm_train_ridge)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void bm_ssim(benchmark::State& state) {
  Rng rng(9);
  Image a({24, 24}), b({24, 24});
  for (double& v : a.values()) v = rng.next_double();
  for (double& v : b.values()) v = rng.next_double();
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::ssim(a, b, {}));
  }
}
BENCHMARK(bm_ssim);

}  // namespace

BENCHMARK_MAIN();
