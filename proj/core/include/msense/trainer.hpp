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

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "msense/corpus.hpp"
#include "msense/model.hpp"
#include "msense/rng.hpp"

namespace msense {

inline constexpr float kAdagradEps = 1e-6f;

/// Numerically stable logistic function; result stays in the open (0,1).
double sigmoid(double x);

/// log(1 + e^x) without overflow; -log sigmoid(x) == softplus(-x).
double softplus(double x);

/// One AdaGrad coordinate: accumulate grad^2, then return
/// lr0 * grad / (sqrt(accumulator) + eps). Accumulation precedes the step.
inline float adagrad_step(float& accumulator, float grad, float lr0) {
  accumulator += grad * grad;
  return lr0 * grad / (std::sqrt(accumulator) + kAdagradEps);
}

/// vec += adagrad-scaled grad, elementwise against `accum`.
void adagrad_apply(std::span<float> vec, std::span<float> accum,
                   std::span<const float> grad, float lr0);

/// One logistic (center, word) pair of the negative-sampling objective.
/// label=true for observed context pairs, false for noise pairs.
/// With g = label - sigmoid(center . v_g(c)): applies the AdaGrad-scaled
/// update g*center to v_g(c) immediately and accumulates g*v_g(c) (the
/// center-side gradient, taken at the pre-update value) into `center_grad`.
/// Returns the pair's negative log-likelihood.
double pair_update(std::span<const float> center, WordId c, bool label,
                   ModelParams& params, float lr0,
                   std::span<float> center_grad);

/// Log-likelihood of one token's objective at the current parameters:
/// sum log sigmoid(center . v_g(c)) over context plus
/// sum log(1 - sigmoid(center . v_g(c'))) over noise. Used by gradient
/// oracles and held-out objective tracking; pure.
double token_objective(std::span<const float> center,
                       std::span<const WordId> context,
                       std::span<const WordId> noise,
                       const ModelParams& params);

struct TokenOutcome {
  bool skipped = false;       // boundary token with no context
  bool sense_created = false; // npmssg spawned a sense
  uint32_t pairs = 0;
  double nll = 0.0;
};

/// Per-worker training state: reusable buffers around the per-token update.
class TokenTrainer {
 public:
  TokenTrainer(ModelParams& params, const NegativeSamplingTable& table);

  /// The per-token step: draw R, gather the context, build the context
  /// vector, resolve the sense (predicted in mssg, assigned-or-created in
  /// npmssg, fixed in skipgram), add the context to the chosen cluster, draw
  /// noise, and gradient-update the center sense vector plus the global
  /// vectors of context and noise words.
  TokenOutcome train_token(std::span<const WordId> sentence, size_t idx,
                           Rng& rng);
  /// Convenience over a corpus position (resolves the sentence).
  TokenOutcome train_token(const EncodedCorpus& corpus, uint64_t pos,
                           Rng& rng);

 private:
  ModelParams& params_;
  const NegativeSamplingTable& table_;
  std::vector<WordId> ctx_, noise_;
  std::vector<float> ctxvec_, center_grad_;
};

struct TrainStats {
  uint64_t tokens_processed = 0;
  uint64_t tokens_skipped = 0;
  uint64_t pairs = 0;
  uint64_t senses_created = 0;
  double loss = 0.0;  // sliding-window mean NLL per token at run end
  double tokens_per_sec = 0.0;
  double wall_seconds = 0.0;
  uint32_t epochs_completed = 0;
};

struct TrainOptions {
  uint32_t workers = 1;
  uint64_t seed = 1;
  uint32_t start_epoch = 0;  // resume offset; epochs run [start, hp.epochs)
  bool quiet = false;        // suppress per-interval progress lines
  std::function<void(uint32_t epoch, const TrainStats&)> on_epoch_end;
};

/// Runs hp.epochs - start_epoch passes over the corpus, sentences partitioned
/// across `workers` asynchronous threads sharing `params`. Single-worker runs
/// with a fixed seed are bit-reproducible; each worker re-seeds per epoch
/// from (seed, worker, epoch) so checkpoint resume replays identically.
/// Progress lines go to stderr as
///   epoch=<e> tokens=<n> loss=<sliding> tok/s=<r> senses=<total>
TrainStats train(ModelParams& params, const EncodedCorpus& corpus,
                 const NegativeSamplingTable& table,
                 const TrainOptions& options = {});

}  // namespace msense
