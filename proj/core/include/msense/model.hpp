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
#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "msense/corpus.hpp"
#include "msense/rng.hpp"

namespace msense {

enum class Mode : uint8_t { skipgram = 0, mssg = 1, npmssg = 2 };

const char* mode_name(Mode m);
Mode mode_from_name(std::string_view name);  // throws on unknown name

struct HyperParams {
  uint32_t dim = 50;
  Mode mode = Mode::mssg;
  uint32_t senses = 3;       // K, fixed sense count in mssg mode
  float lambda = -0.5f;      // npmssg: spawn a sense when max cosine < lambda
  uint32_t max_senses = 0;   // npmssg cap; 0 = unbounded
  uint32_t window = 5;       // N, max one-sided context width
  uint32_t negatives = 1;    // S, noise words per observed context word
  float lr0 = 0.025f;        // AdaGrad initial learning rate
  uint32_t epochs = 1;
  uint64_t min_count = 20;
  uint32_t multi_sense_top_m = 0;  // >0: senses only for the top-m words
  float subsample = 0.0f;          // frequent-word subsampling threshold; 0 = off

  /// Throws std::invalid_argument on contradictory settings.
  void validate() const;
};

/// The shared parameter store: one global vector per word, per-sense vectors
/// with running cluster centers stored as (sum, count), and AdaGrad
/// accumulators aligned with every trainable coordinate.
///
/// Concurrency contract: gradient updates from concurrent workers race
/// benignly (torn/stale float reads tolerated); cluster counts are atomic so
/// they stay exact; npmssg sense creation takes a per-word spinlock and
/// publishes storage with release/acquire so readers never see a partially
/// created sense. Single-worker runs are fully deterministic.
class ModelParams {
 public:
  /// Zero-initialized storage. In skipgram/mssg modes every word gets its
  /// fixed sense count up front; in npmssg no senses exist yet.
  ModelParams(size_t vocab_size, const HyperParams& hp);

  /// Random initialization: global and sense vectors i.i.d. uniform in
  /// [-0.5/d, +0.5/d] per coordinate, cluster state and AdaGrad zero.
  static ModelParams init(size_t vocab_size, const HyperParams& hp, Rng& rng);

  ModelParams(ModelParams&&) noexcept = default;
  ModelParams& operator=(ModelParams&&) noexcept = default;

  size_t vocab_size() const { return vocab_; }
  uint32_t dim() const { return d_; }
  Mode mode() const { return hp_.mode; }
  const HyperParams& hp() const { return hp_; }
  /// Extends the training horizon when resuming from a checkpoint.
  void set_epochs(uint32_t epochs) { hp_.epochs = epochs; }

  /// Current sense count k(w).
  uint32_t num_senses(WordId w) const;
  /// Mode-dependent ceiling on k(w): K (or 1 outside the top-m words) in
  /// mssg, the configured cap in npmssg, 1 in skipgram.
  uint32_t sense_limit(WordId w) const;

  std::span<float> global(WordId w) {
    return {global_.data() + size_t(w) * d_, d_};
  }
  std::span<const float> global(WordId w) const {
    return {global_.data() + size_t(w) * d_, d_};
  }
  std::span<float> global_adagrad(WordId w) {
    return {global_ada_.data() + size_t(w) * d_, d_};
  }
  std::span<const float> global_adagrad(WordId w) const {
    return {global_ada_.data() + size_t(w) * d_, d_};
  }

  std::span<float> sense_vector(WordId w, uint32_t s);
  std::span<const float> sense_vector(WordId w, uint32_t s) const;
  std::span<float> sense_adagrad(WordId w, uint32_t s);
  std::span<const float> sense_adagrad(WordId w, uint32_t s) const;
  std::span<float> cluster_sum(WordId w, uint32_t s);
  std::span<const float> cluster_sum(WordId w, uint32_t s) const;
  uint64_t cluster_count(WordId w, uint32_t s) const;
  void set_cluster_count(WordId w, uint32_t s, uint64_t v);  // deserialization

  /// Adds a context vector to cluster s of word w: sum += ctx, count += 1.
  /// The center mu(w,s) = sum/count thereby stays the running mean.
  void add_context_to_cluster(WordId w, uint32_t s, std::span<const float> ctx);

  /// mu(w,s), zero if the cluster is empty. Writes into `out`.
  void center(WordId w, uint32_t s, std::span<float> out) const;

  /// Cosine between the cluster center of (w,s) and `v`; 0 for an empty
  /// cluster. Uses the raw sum (same cosine as the mean).
  double center_cosine(WordId w, uint32_t s, std::span<const float> v) const;

  /// npmssg: appends a sense with a fresh uniform[-0.5/d,0.5/d] vector and
  /// empty cluster. Thread-safe; returns the new sense index.
  uint32_t add_sense_random(WordId w, Rng& rng);
  /// npmssg deserialization: make k zeroed senses exist for w.
  void ensure_senses(WordId w, uint32_t k);

  uint64_t total_senses() const;
  /// k -> number of word types currently holding k senses.
  std::map<uint32_t, uint64_t> sense_count_histogram() const;

  bool all_finite() const;
  /// Bitwise equality of global + sense vectors (the learned embeddings).
  bool same_vectors(const ModelParams& other) const;
  /// Bitwise equality of everything stored, optionally incl. AdaGrad state.
  bool same_state(const ModelParams& other, bool with_optimizer) const;

 private:
  struct SenseSlot {
    std::unique_ptr<float[]> data;  // [vec d][adagrad d][sum d]
    std::atomic<uint64_t> count{0};
  };
  struct WordSenses {
    std::atomic<uint32_t> k{0};
    std::atomic<SenseSlot**> view{nullptr};
    uint32_t capacity = 0;                          // guarded by lock
    std::atomic_flag lock;                          // creation lock
    std::vector<std::unique_ptr<SenseSlot>> slots;  // guarded by lock
    std::vector<std::unique_ptr<SenseSlot*[]>> views;  // current + stale arrays
  };

  ModelParams() = default;
  void randomize(Rng& rng);
  uint32_t append_sense(WordId w, Rng* rng);
  const SenseSlot* slot(WordId w, uint32_t s) const;
  SenseSlot* slot(WordId w, uint32_t s);

  HyperParams hp_;
  size_t vocab_ = 0;
  uint32_t d_ = 0;
  bool dynamic_ = false;  // npmssg storage

  std::vector<float> global_, global_ada_;

  // Fixed-k storage (skipgram/mssg): flat, offset-indexed.
  std::vector<uint32_t> k_fixed_;
  std::vector<uint64_t> offset_;
  std::vector<float> sense_, sense_ada_, csum_;
  std::vector<std::atomic<uint64_t>> ccount_;

  // Growable storage (npmssg).
  std::vector<WordSenses> dyn_;
};

/// Mean of the global vectors of `context_ids`. Throws "no context" when the
/// list is empty. Width = number of contributing words.
struct ContextVector {
  std::vector<float> v;
  uint32_t width = 0;
};
ContextVector context_vector(std::span<const WordId> context_ids,
                             const ModelParams& params);
/// In-place variant for hot loops.
void context_vector(std::span<const WordId> context_ids,
                    const ModelParams& params, std::span<float> out);

/// argmax_k cosine(mu(w,k), ctx). Exact ties (e.g. the all-zero centers at
/// cold start) are broken uniformly at random; the rng is consumed only when
/// a tie actually occurs, so single-maximizer calls stay stream-neutral.
uint32_t predict_sense(const ModelParams& params, WordId w,
                       std::span<const float> ctx, Rng& rng);

struct SenseAssignment {
  uint32_t sense = 0;
  bool created = false;
};
/// npmssg sense resolution: first occurrence creates sense 0; otherwise a new
/// sense is created when max_k cosine(mu(w,k), ctx) < lambda and the cap
/// allows, else the nearest existing sense is returned.
SenseAssignment npmssg_assign(ModelParams& params, WordId w,
                              std::span<const float> ctx, Rng& rng);

}  // namespace msense
