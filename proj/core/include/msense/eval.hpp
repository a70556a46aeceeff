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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msense/corpus.hpp"
#include "msense/model.hpp"

namespace msense {

// All similarity values are cosine similarities; everything below is
// read-only over ModelParams.

inline constexpr double kPosteriorEps = 1e-6;

/// P(w, c, k): normalized inverse cosine distance from the context vector to
/// each cluster center: probs_k = (1/(dist_k+eps)) / sum_j (1/(dist_j+eps))
/// with dist_k = 1 - cos(mu(w,k), ctx). Throws "no senses" when k(w) = 0.
std::vector<double> sense_posterior(const ModelParams& params, WordId w,
                                    std::span<const float> ctx);

double global_sim(const ModelParams& params, WordId w1, WordId w2);
double avg_sim(const ModelParams& params, WordId w1, WordId w2);
double avg_sim_c(const ModelParams& params, WordId w1,
                 std::span<const float> ctx1, WordId w2,
                 std::span<const float> ctx2);
/// Weighted-sum core of avgSimC with caller-supplied posteriors.
double avg_sim_c_weighted(const ModelParams& params, WordId w1,
                          std::span<const double> post1, WordId w2,
                          std::span<const double> post2);
double local_sim(const ModelParams& params, WordId w1,
                 std::span<const float> ctx1, WordId w2,
                 std::span<const float> ctx2);

/// Spearman rank correlation with average ranks for ties. Throws on length
/// mismatch or fewer than two points; returns 0 when either side has zero
/// rank variance.
double spearman(std::span<const double> a, std::span<const double> b);

// --- Word-pair judgment datasets ---------------------------------------------

struct JudgmentRecord {
  std::string word1, word2;
  std::vector<std::string> context1, context2;  // both empty or both present
  double human_score = 0.0;
  bool contextual() const { return !context1.empty() || !context2.empty(); }
};

/// WordSim-style CSV: word1,word2,score with an optional header line.
std::vector<JudgmentRecord> load_wordsim_csv(const std::string& path,
                                             TokenizerOptions opts = {});

/// SCWS-style TSV: [id] word1 pos1 word2 pos2 context1 context2 score [...].
/// The target word inside each context is delimited by <b>...</b> and is
/// excluded from the stored context tokens.
std::vector<JudgmentRecord> load_scws_tsv(const std::string& path,
                                          TokenizerOptions opts = {});

enum class SimMetric { global_sim, avg_sim, avg_sim_c, local_sim };
const char* metric_name(SimMetric m);
SimMetric metric_from_name(std::string_view name);
bool metric_needs_context(SimMetric m);

struct SimilarityResult {
  double rho_x100 = 0.0;
  size_t pairs_used = 0;
  size_t pairs_skipped = 0;  // OOV words, senseless words, empty contexts
};

/// Scores every record with the chosen metric and reports Spearman rho x100
/// against the human judgments. Contextual metrics on a context-free dataset
/// throw std::invalid_argument.
SimilarityResult evaluate_similarity(std::span<const JudgmentRecord> records,
                                     SimMetric metric,
                                     const ModelParams& params,
                                     const Vocabulary& vocab);

// --- Nearest neighbors --------------------------------------------------------

struct Neighbor {
  WordId id;
  double similarity;
};

inline constexpr int kGlobalSense = -1;

/// Ranks all other words by cosine between the query's sense vector (or its
/// global vector when sense = kGlobalSense) and each candidate's global
/// vector. Ties are ordered by ascending word id.
std::vector<Neighbor> nearest_neighbors(const ModelParams& params,
                                        WordId query, int sense, size_t top_n);

/// Vocabulary words closest to `word` by edit distance (OOV suggestions).
std::vector<std::string> nearest_spellings(const Vocabulary& vocab,
                                           std::string_view word, size_t n);

// --- Analogy -----------------------------------------------------------------

struct AnalogyQuestion {
  std::string a, b, c, d;
};

/// Google analogy text format: `: section` headers and 4-token lines.
/// Malformed lines are skipped (with a warning to stderr).
std::vector<AnalogyQuestion> load_analogy(const std::string& path,
                                          TokenizerOptions opts = {});

struct AnalogyResult {
  double accuracy = 0.0;
  size_t used = 0;
  size_t skipped = 0;  // questions with an OOV word
};

/// Predicts argmax_w cos(v_g(b) - v_g(a) + v_g(c), v_g(w)) over the
/// vocabulary excluding {a, b, c}; accuracy is the fraction equal to d.
AnalogyResult analogy_accuracy(std::span<const AnalogyQuestion> questions,
                               const ModelParams& params,
                               const Vocabulary& vocab);
/// Single-question prediction; nullopt when any word is OOV.
std::optional<WordId> analogy_predict(const ModelParams& params,
                                      const Vocabulary& vocab,
                                      const AnalogyQuestion& q);

/// Context vector for evaluation: mean of the global vectors of the
/// in-vocabulary context tokens. nullopt when none are in vocabulary.
std::optional<std::vector<float>> eval_context_vector(
    const ModelParams& params, const Vocabulary& vocab,
    std::span<const std::string> context_tokens);

}  // namespace msense
