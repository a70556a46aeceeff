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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "msense/rng.hpp"

namespace msense {

using WordId = uint32_t;

struct TokenizerOptions {
  bool lowercase = true;  // ASCII lowercasing; bytes >= 0x80 pass through
};

/// Word-type <-> id mapping. Ids are frequency ranks: words are ordered by
/// descending count, ties broken by first occurrence in the stream.
struct Vocabulary {
  std::vector<std::string> words;
  std::vector<uint64_t> counts;
  uint64_t total_tokens = 0;  // retained tokens only

  size_t size() const { return words.size(); }

  std::optional<WordId> lookup(std::string_view w) const {
    auto it = index_.find(w);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  void rebuild_index();  // called by builders/loaders after filling words

 private:
  struct StringHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
};

/// Token ids with sentence boundaries. Sentences are newline-delimited in
/// the source text; context windows never cross them. Out-of-vocabulary
/// tokens are dropped, so empty sentences leave no trace.
struct EncodedCorpus {
  std::vector<WordId> tokens;
  std::vector<uint64_t> sentence_offsets;  // starts, plus tokens.size() sentinel

  size_t size() const { return tokens.size(); }
  size_t num_sentences() const {
    return sentence_offsets.empty() ? 0 : sentence_offsets.size() - 1;
  }
  std::span<const WordId> sentence(size_t s) const {
    return std::span<const WordId>(tokens).subspan(
        sentence_offsets[s], sentence_offsets[s + 1] - sentence_offsets[s]);
  }
  /// [begin, end) of the sentence containing token position `pos`.
  std::pair<uint64_t, uint64_t> sentence_bounds(uint64_t pos) const;
};

/// Noise distribution P(w) proportional to count(w)^0.75, realized as a
/// Walker/Vose alias table for O(1) sampling.
class NegativeSamplingTable {
 public:
  static constexpr double kPower = 0.75;

  explicit NegativeSamplingTable(const Vocabulary& vocab);

  WordId sample(Rng& rng) const {
    const auto slot = rng.bounded(uint32_t(threshold_.size()));
    return rng.uniform01() < threshold_[slot] ? WordId(slot) : alias_[slot];
  }

  /// Target probability the table was built from (normalized count^0.75).
  double prob(WordId w) const { return prob_[w]; }

  /// Probability implied by the alias slots; equals prob() up to rounding.
  double implied_prob(WordId w) const;

  size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<double> threshold_;
  std::vector<WordId> alias_;
};

// --- Tokenization -----------------------------------------------------------

/// Splits a stream into whitespace-delimited tokens, one sentence per line.
/// Empty sentences are skipped.
class SentenceReader {
 public:
  SentenceReader(std::istream& in, TokenizerOptions opts = {});
  /// Fills `sentence` with the next non-empty sentence; false at EOF.
  bool next(std::vector<std::string>& sentence);

 private:
  std::istream& in_;
  TokenizerOptions opts_;
  std::string line_;
};

// --- Operations -------------------------------------------------------------

/// Streaming vocabulary accumulator; feed tokens, then finish(min_count).
class VocabBuilder {
 public:
  void add(std::string_view token);
  /// Throws: "empty corpus" if no tokens were seen, "vocabulary empty after
  /// pruning" if nothing survives min_count.
  Vocabulary finish(uint64_t min_count);

 private:
  std::unordered_map<std::string, std::pair<uint64_t, uint64_t>>
      counts_;  // word -> (count, first occurrence)
  uint64_t seen_ = 0;
};

Vocabulary build_vocab(std::span<const std::string> tokens, uint64_t min_count);
Vocabulary build_vocab(std::istream& in, uint64_t min_count,
                       TokenizerOptions opts = {});
Vocabulary build_vocab_files(std::span<const std::string> paths,
                             uint64_t min_count, TokenizerOptions opts = {});

EncodedCorpus encode(std::span<const std::string> tokens,
                     const Vocabulary& vocab);
EncodedCorpus encode(std::istream& in, const Vocabulary& vocab,
                     TokenizerOptions opts = {});
EncodedCorpus encode_files(std::span<const std::string> paths,
                           const Vocabulary& vocab, TokenizerOptions opts = {});

inline NegativeSamplingTable build_noise_table(const Vocabulary& vocab) {
  return NegativeSamplingTable(vocab);
}

/// Gathers up to `radius` ids on each side of `idx` within `sentence`,
/// excluding the center itself.
void gather_window(std::span<const WordId> sentence, size_t idx,
                   uint32_t radius, std::vector<WordId>& out);

/// Draws the window size R uniformly from {1..max_window}, then gathers the
/// context of the token at `pos`, truncated at sentence boundaries. May be
/// empty for a single-token sentence; callers skip such tokens.
std::vector<WordId> sample_window(uint64_t pos, const EncodedCorpus& corpus,
                                  uint32_t max_window, Rng& rng);

/// S i.i.d. noise draws per context word, in context order.
void sample_negatives(std::span<const WordId> context, uint32_t S,
                      const NegativeSamplingTable& table, Rng& rng,
                      std::vector<WordId>& out);
std::vector<WordId> sample_negatives(std::span<const WordId> context,
                                     uint32_t S,
                                     const NegativeSamplingTable& table,
                                     Rng& rng);

}  // namespace msense
