#include <seqlab/inversion.hpp>
#include <seqlab/languages.hpp>
#include <seqlab/rnn.hpp>
#include <seqlab/training.hpp>

#include <benchmark/benchmark.h>

#include <vector>

using namespace seqlab;

static void BM_gaussian_matrix(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  RngStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_matrix(rng, m, m, 1.0));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(m * m));
}
BENCHMARK(BM_gaussian_matrix)->Arg(256)->Arg(1024);

static void BM_forward(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const RnnParams p = init_params(RngStream(2), m, 4, 1);
  const NormalizedSequence x = base_sequence(6, 4, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, x));
}
BENCHMARK(BM_forward)->Arg(512)->Arg(2048);

static void BM_forward_streamed(benchmark::State& state) {
  const RnnParams p = init_params(RngStream(2), 2048, 4, 1, BVariance::one_over_dout, WeightStorage::streamed);
  const NormalizedSequence x = base_sequence(6, 4, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, x));
}
BENCHMARK(BM_forward_streamed)->Unit(benchmark::kMillisecond);

static void BM_hidden_states_batch(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const RnnParams p = init_params(RngStream(2), m, 4, 1);
  RngStream r(6);
  std::vector<Mat> inputs;
  for (int l = 0; l < 4; ++l) inputs.push_back(gaussian_matrix(r, 4, 256, 1.0));
  const std::vector<std::size_t> steps{4};
  for (auto _ : state) benchmark::DoNotOptimize(hidden_states_batch(p, inputs, steps));
}
BENCHMARK(BM_hidden_states_batch)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_build_decoder(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const RnnParams p = init_params(RngStream(3), m, 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_decoder(p, 6, 0.05, DecoderVariant::full));
}
BENCHMARK(BM_build_decoder)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_training_step(benchmark::State& state) {
  const RnnParams p = init_params(RngStream(4), 32, 3, 1);
  Offsets off = Offsets::zeros(p);
  OptimizerState st = OptimizerState::zeros(p);
  TrainConfig cfg;
  const Mat tokens = encode_tokens("0110100111010010", TokenEncoding::one_hot_bias);
  const Vec y = Vec::Constant(1, 1.0);
  for (auto _ : state) {
    const Gradients g = rnn_gradients(p, off, tokens, y, cfg);
    optimizer_step(off, g, st, cfg.optimizer);
  }
}
BENCHMARK(BM_training_step);

static void BM_generate_dataset(benchmark::State& state) {
  const LanguageSpec spec = language_spec("tomita4");
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(spec, 1000, 200, 2, 50, RngStream(5)));
}
BENCHMARK(BM_generate_dataset)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
