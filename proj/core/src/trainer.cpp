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
#include "msense/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "msense/vecmath.hpp"

namespace msense {

double sigmoid(double x) {
  // Clamp so the result never rounds to exactly 0 or 1 in double;
  // |error| vs the exact value stays far below 1e-6.
  if (x > 35.0) x = 35.0;
  if (x < -35.0) x = -35.0;
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

void adagrad_apply(std::span<float> vec, std::span<float> accum,
                   std::span<const float> grad, float lr0) {
  for (size_t i = 0; i < vec.size(); ++i)
    vec[i] += adagrad_step(accum[i], grad[i], lr0);
}

double pair_update(std::span<const float> center, WordId c, bool label,
                   ModelParams& params, float lr0,
                   std::span<float> center_grad) {
  float* gc = params.global(c).data();
  float* ga = params.global_adagrad(c).data();
  const size_t d = center.size();

  float dotv = 0.0f;
  for (size_t i = 0; i < d; ++i) dotv += center[i] * gc[i];

  const double s = sigmoid(double(dotv));
  const float g = float((label ? 1.0 : 0.0) - s);

  for (size_t i = 0; i < d; ++i) {
    const float gci = gc[i];  // pre-update value feeds the center gradient
    center_grad[i] += g * gci;
    gc[i] = gci + adagrad_step(ga[i], g * center[i], lr0);
  }
  return label ? softplus(-double(dotv)) : softplus(double(dotv));
}

double token_objective(std::span<const float> center,
                       std::span<const WordId> context,
                       std::span<const WordId> noise,
                       const ModelParams& params) {
  double ll = 0.0;
  for (WordId c : context)
    ll -= softplus(-double(dot(center, params.global(c))));
  for (WordId c : noise)
    ll -= softplus(double(dot(center, params.global(c))));
  return ll;
}

// --- Per-token step ----------------------------------------------------------

TokenTrainer::TokenTrainer(ModelParams& params,
                           const NegativeSamplingTable& table)
    : params_(params), table_(table) {
  ctxvec_.resize(params.dim());
  center_grad_.resize(params.dim());
}

TokenOutcome TokenTrainer::train_token(std::span<const WordId> sentence,
                                       size_t idx, Rng& rng) {
  TokenOutcome out;
  const HyperParams& hp = params_.hp();
  const WordId w = sentence[idx];

  const uint32_t radius = 1 + rng.bounded(hp.window);
  gather_window(sentence, idx, radius, ctx_);
  if (ctx_.empty()) {
    out.skipped = true;
    return out;
  }

  context_vector(ctx_, params_, ctxvec_);

  uint32_t sense = 0;
  if (hp.mode == Mode::mssg) {
    sense = predict_sense(params_, w, ctxvec_, rng);
    params_.add_context_to_cluster(w, sense, ctxvec_);
  } else if (hp.mode == Mode::npmssg) {
    const auto assigned = npmssg_assign(params_, w, ctxvec_, rng);
    sense = assigned.sense;
    out.sense_created = assigned.created;
    params_.add_context_to_cluster(w, sense, ctxvec_);
  }

  sample_negatives(ctx_, hp.negatives, table_, rng, noise_);
  // A noise word colliding with the context word it was drawn for is
  // redrawn once; a second collision is kept.
  for (size_t i = 0; i < ctx_.size(); ++i)
    for (uint32_t s = 0; s < hp.negatives; ++s) {
      auto& n = noise_[i * hp.negatives + s];
      if (n == ctx_[i]) n = table_.sample(rng);
    }

  auto center = params_.sense_vector(w, sense);
  std::fill(center_grad_.begin(), center_grad_.end(), 0.0f);
  double nll = 0.0;
  for (WordId c : ctx_)
    nll += pair_update(center, c, true, params_, hp.lr0, center_grad_);
  for (WordId c : noise_)
    nll += pair_update(center, c, false, params_, hp.lr0, center_grad_);
  adagrad_apply(center, params_.sense_adagrad(w, sense), center_grad_, hp.lr0);

  out.pairs = uint32_t(ctx_.size() + noise_.size());
  out.nll = nll;
  return out;
}

TokenOutcome TokenTrainer::train_token(const EncodedCorpus& corpus,
                                       uint64_t pos, Rng& rng) {
  const auto [begin, end] = corpus.sentence_bounds(pos);
  return train_token(
      std::span<const WordId>(corpus.tokens).subspan(begin, end - begin),
      size_t(pos - begin), rng);
}

// --- Epoch orchestration ------------------------------------------------------

namespace {

struct SharedCounters {
  std::atomic<uint64_t> tokens{0};
  std::atomic<uint64_t> skipped{0};
  std::atomic<uint64_t> pairs{0};
  std::atomic<uint64_t> senses_created{0};
  std::atomic<double> nll{0.0};
};

/// Contiguous sentence shards, balanced by token count.
std::vector<std::pair<size_t, size_t>> partition_sentences(
    const EncodedCorpus& corpus, uint32_t workers) {
  const size_t n = corpus.num_sentences();
  const uint64_t total = corpus.size();
  std::vector<std::pair<size_t, size_t>> shards;
  size_t begin = 0;
  for (uint32_t wkr = 0; wkr < workers; ++wkr) {
    const uint64_t target = total * (wkr + 1) / workers;
    size_t end = begin;
    while (end < n && corpus.sentence_offsets[end + 1] <= target) ++end;
    if (wkr + 1 == workers) end = n;
    shards.emplace_back(begin, end);
    begin = end;
  }
  return shards;
}

class Worker {
 public:
  Worker(ModelParams& params, const EncodedCorpus& corpus,
         const NegativeSamplingTable& table, SharedCounters& counters,
         const double* frequencies)
      : params_(params), corpus_(corpus), counters_(counters),
        trainer_(params, table), freq_(frequencies) {}

  void run(size_t sent_begin, size_t sent_end, Rng rng) {
    const HyperParams& hp = params_.hp();
    const bool subsampling = hp.subsample > 0.0f;
    for (size_t s = sent_begin; s < sent_end; ++s) {
      std::span<const WordId> sent = corpus_.sentence(s);
      if (subsampling) {
        filter_subsampled(sent, rng);
        sent = kept_;
      }
      for (size_t i = 0; i < sent.size(); ++i) {
        const TokenOutcome o = trainer_.train_token(sent, i, rng);
        if (o.skipped)
          ++local_skipped_;
        else {
          ++local_tokens_;
          local_pairs_ += o.pairs;
          local_nll_ += o.nll;
        }
        if (o.sense_created) ++local_senses_;
        if (((local_tokens_ + local_skipped_) & 0x3fff) == 0) flush();
      }
    }
    flush();
  }

 private:
  void filter_subsampled(std::span<const WordId> sent, Rng& rng) {
    kept_.clear();
    const HyperParams& hp = params_.hp();
    for (WordId w : sent) {
      const double f = freq_[w];
      if (f > hp.subsample) {
        const double keep = std::sqrt(double(hp.subsample) / f);
        if (rng.uniform01() >= keep) continue;  // discard prob 1 - sqrt(t/f)
      }
      kept_.push_back(w);
    }
  }

  void flush() {
    counters_.tokens.fetch_add(local_tokens_, std::memory_order_relaxed);
    counters_.skipped.fetch_add(local_skipped_, std::memory_order_relaxed);
    counters_.pairs.fetch_add(local_pairs_, std::memory_order_relaxed);
    counters_.senses_created.fetch_add(local_senses_,
                                       std::memory_order_relaxed);
    counters_.nll.fetch_add(local_nll_, std::memory_order_relaxed);
    local_tokens_ = local_skipped_ = local_pairs_ = local_senses_ = 0;
    local_nll_ = 0.0;
  }

  ModelParams& params_;
  const EncodedCorpus& corpus_;
  SharedCounters& counters_;
  TokenTrainer trainer_;
  std::vector<WordId> kept_;
  const double* freq_ = nullptr;
  uint64_t local_tokens_ = 0, local_skipped_ = 0, local_pairs_ = 0,
           local_senses_ = 0;
  double local_nll_ = 0.0;
};

}  // namespace

TrainStats train(ModelParams& params, const EncodedCorpus& corpus,
                 const NegativeSamplingTable& table,
                 const TrainOptions& options) {
  const HyperParams& hp = params.hp();
  hp.validate();
  if (corpus.size() == 0) throw std::invalid_argument("empty corpus");
  if (options.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (table.size() != params.vocab_size())
    throw std::invalid_argument("noise table does not match vocabulary");
  if (options.start_epoch >= hp.epochs)
    throw std::invalid_argument("start_epoch must be below epochs");

  // Relative frequencies for optional subsampling.
  std::vector<double> freq(params.vocab_size(), 0.0);
  if (hp.subsample > 0.0f) {
    std::vector<uint64_t> occ(params.vocab_size(), 0);
    for (WordId t : corpus.tokens) ++occ[t];
    for (size_t i = 0; i < occ.size(); ++i)
      freq[i] = double(occ[i]) / double(corpus.size());
  }

  const auto shards = partition_sentences(corpus, options.workers);
  SharedCounters counters;
  const auto t0 = std::chrono::steady_clock::now();

  TrainStats stats;
  double window_nll = 0.0;
  uint64_t window_tokens = 0;

  for (uint32_t epoch = options.start_epoch; epoch < hp.epochs; ++epoch) {
    std::atomic<uint32_t> running{options.workers};
    std::vector<std::thread> threads;
    threads.reserve(options.workers);
    for (uint32_t wkr = 0; wkr < options.workers; ++wkr) {
      threads.emplace_back([&, wkr] {
        Worker worker(params, corpus, table, counters, freq.data());
        worker.run(shards[wkr].first, shards[wkr].second,
                   Rng::for_worker(options.seed, wkr, epoch));
        running.fetch_sub(1, std::memory_order_release);
      });
    }

    uint64_t last_tokens = counters.tokens.load();
    double last_nll = counters.nll.load();
    auto last_time = std::chrono::steady_clock::now();
    while (running.load(std::memory_order_acquire) != 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      const auto now = std::chrono::steady_clock::now();
      if (now - last_time < std::chrono::seconds(1)) continue;
      const uint64_t tokens = counters.tokens.load();
      const double nll = counters.nll.load();
      const uint64_t dt_tokens = tokens - last_tokens;
      if (dt_tokens > 0) {
        window_nll = (nll - last_nll) / double(dt_tokens);
        window_tokens = dt_tokens;
        const double secs =
            std::chrono::duration<double>(now - last_time).count();
        if (!options.quiet)
          std::fprintf(stderr,
                       "epoch=%u tokens=%" PRIu64
                       " loss=%.4f tok/s=%.0f senses=%" PRIu64 "\n",
                       epoch + 1, tokens, window_nll, dt_tokens / secs,
                       params.total_senses());
      }
      last_tokens = tokens;
      last_nll = nll;
      last_time = now;
    }
    for (auto& t : threads) t.join();

    if (!params.all_finite())
      throw std::runtime_error("non-finite parameter detected after epoch " +
                               std::to_string(epoch + 1));

    stats.epochs_completed = epoch + 1;
    const uint64_t tokens = counters.tokens.load();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (window_tokens == 0 && tokens > 0)
      window_nll = counters.nll.load() / double(tokens);
    if (!options.quiet)
      std::fprintf(stderr,
                   "epoch=%u tokens=%" PRIu64
                   " loss=%.4f tok/s=%.0f senses=%" PRIu64 "\n",
                   epoch + 1, tokens, window_nll,
                   elapsed > 0 ? tokens / elapsed : 0.0,
                   params.total_senses());

    stats.tokens_processed = tokens;
    stats.tokens_skipped = counters.skipped.load();
    stats.pairs = counters.pairs.load();
    stats.senses_created = counters.senses_created.load();
    stats.loss = window_nll;
    stats.wall_seconds = elapsed;
    stats.tokens_per_sec = elapsed > 0 ? double(tokens) / elapsed : 0.0;
    if (options.on_epoch_end) options.on_epoch_end(epoch, stats);
  }
  return stats;
}

}  // namespace msense
