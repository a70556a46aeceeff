/*
 * Copyright 2026 The msense authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Microbenchmarks for the training-loop hot path plus whole-epoch throughput
// (tokens/s, including the 1 -> N worker scaling that asynchronous updates
// are supposed to buy).
//
//   ./msense_bench --benchmark_filter=Epoch

#include <benchmark/benchmark.h>

#include <sstream>
#include <string>
#include <vector>

#include "msense/corpus.hpp"
#include "msense/model.hpp"
#include "msense/trainer.hpp"

using namespace msense;

namespace {

/// Zipf-ish random text, `tokens` long over `types` word types.
std::string random_text(size_t tokens, uint32_t types, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> cdf(types);
  double z = 0;
  for (uint32_t r = 0; r < types; ++r) {
    z += 1.0 / double(r + 1);
    cdf[r] = z;
  }
  for (auto& x : cdf) x /= z;
  std::string text;
  text.reserve(tokens * 6);
  for (size_t i = 0; i < tokens; ++i) {
    const double u = rng.uniform01();
    const size_t r = size_t(std::lower_bound(cdf.begin(), cdf.end(), u) -
                            cdf.begin());
    text += 'w';
    text += std::to_string(r);
    text += (i % 20 == 19) ? '\n' : ' ';
  }
  return text;
}

struct Corpus {
  Vocabulary vocab;
  EncodedCorpus encoded;
  explicit Corpus(size_t tokens, uint32_t types = 5000, uint64_t seed = 1) {
    const std::string text = random_text(tokens, types, seed);
    std::istringstream vin(text);
    vocab = build_vocab(vin, 1);
    std::istringstream ein(text);
    encoded = encode(ein, vocab);
  }
};

HyperParams make_hp(Mode mode, uint32_t dim, uint32_t senses) {
  HyperParams hp;
  hp.mode = mode;
  hp.dim = dim;
  hp.senses = senses;
  hp.min_count = 1;
  return hp;
}

}  // namespace

static void BM_Sigmoid(benchmark::State& state) {
  double x = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sigmoid(x));
    x += 0.001;
    if (x > 8.0) x = -8.0;
  }
}
BENCHMARK(BM_Sigmoid);

static void BM_NoiseSample(benchmark::State& state) {
  Corpus c(100'000);
  auto table = build_noise_table(c.vocab);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(table.sample(rng));
}
BENCHMARK(BM_NoiseSample);

static void BM_PairUpdate(benchmark::State& state) {
  const uint32_t d = uint32_t(state.range(0));
  Rng rng(4);
  auto params = ModelParams::init(64, make_hp(Mode::skipgram, d, 1), rng);
  std::vector<float> center(d), grad(d, 0.0f);
  for (auto& x : center) x = rng.uniform(-0.1f, 0.1f);
  uint32_t c = 0;
  for (auto _ : state) {
    pair_update(center, c, (c & 1) != 0, params, 0.025f, grad);
    c = (c + 1) & 63;
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_PairUpdate)->Arg(50)->Arg(300);

static void BM_PredictSense(benchmark::State& state) {
  const uint32_t K = uint32_t(state.range(0));
  const uint32_t d = 50;
  Rng rng(5);
  auto params = ModelParams::init(16, make_hp(Mode::mssg, d, K), rng);
  std::vector<float> ctx(d);
  for (WordId w = 0; w < 16; ++w)
    for (uint32_t s = 0; s < K; ++s) {
      for (auto& x : ctx) x = rng.uniform(-1.0f, 1.0f);
      params.add_context_to_cluster(w, s, ctx);
    }
  for (auto& x : ctx) x = rng.uniform(-1.0f, 1.0f);
  WordId w = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_sense(params, w, ctx, rng));
    w = (w + 1) & 15;
  }
}
BENCHMARK(BM_PredictSense)->Arg(2)->Arg(3)->Arg(10);

static void BM_TrainToken(benchmark::State& state) {
  const auto mode = Mode(state.range(0));
  static Corpus corpus(200'000);
  auto table = build_noise_table(corpus.vocab);
  Rng rng(6);
  auto params =
      ModelParams::init(corpus.vocab.size(), make_hp(mode, 50, 3), rng);
  TokenTrainer trainer(params, table);
  uint64_t pos = 0;
  for (auto _ : state) {
    trainer.train_token(corpus.encoded, pos, rng);
    if (++pos >= corpus.encoded.size()) pos = 0;
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_TrainToken)
    ->Arg(int(Mode::skipgram))
    ->Arg(int(Mode::mssg))
    ->Arg(int(Mode::npmssg));

/// Whole-epoch throughput; reports wall-clock tokens/s per worker count.
/// Scaling across workers depends on vocabulary size and core count: the
/// asynchronous updates only avoid cache-line contention when the hot words
/// are spread over a large vocabulary.
static void BM_EpochThroughput(benchmark::State& state) {
  const uint32_t workers = uint32_t(state.range(0));
  static Corpus corpus(2'000'000, 50'000, 2);
  auto table = build_noise_table(corpus.vocab);
  for (auto _ : state) {
    state.PauseTiming();
    Rng rng(7);
    auto params =
        ModelParams::init(corpus.vocab.size(), make_hp(Mode::mssg, 50, 3), rng);
    TrainOptions opts;
    opts.workers = workers;
    opts.seed = 7;
    opts.quiet = true;
    state.ResumeTiming();
    train(params, corpus.encoded, table, opts);
  }
  state.counters["tokens/s"] = benchmark::Counter(
      double(state.iterations()) * double(corpus.encoded.size()),
      benchmark::Counter::kIsRate);
}
BENCHMARK(BM_EpochThroughput)
    ->Arg(1)
    ->Arg(2)
    ->Arg(4)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime()
    ->Iterations(1);

BENCHMARK_MAIN();
