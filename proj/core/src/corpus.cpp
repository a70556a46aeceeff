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
#include "msense/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace msense {

void Vocabulary::rebuild_index() {
  index_.clear();
  index_.reserve(words.size());
  for (WordId id = 0; id < words.size(); ++id) index_.emplace(words[id], id);
}

std::pair<uint64_t, uint64_t> EncodedCorpus::sentence_bounds(
    uint64_t pos) const {
  auto it = std::upper_bound(sentence_offsets.begin(), sentence_offsets.end(),
                             pos);
  // it points at the first offset > pos; the sentence starts at *(it-1).
  return {*(it - 1), *it};
}

// --- Tokenization -----------------------------------------------------------

namespace {

inline bool is_token_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

void split_line(const std::string& line, bool lowercase,
                std::vector<std::string>& out) {
  size_t i = 0;
  const size_t n = line.size();
  while (i < n) {
    while (i < n && is_token_space(line[i])) ++i;
    size_t start = i;
    while (i < n && !is_token_space(line[i])) ++i;
    if (i > start) {
      std::string tok = line.substr(start, i - start);
      if (lowercase) {
        for (char& c : tok)
          if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
      }
      out.push_back(std::move(tok));
    }
  }
}

}  // namespace

SentenceReader::SentenceReader(std::istream& in, TokenizerOptions opts)
    : in_(in), opts_(opts) {}

bool SentenceReader::next(std::vector<std::string>& sentence) {
  sentence.clear();
  while (std::getline(in_, line_)) {
    split_line(line_, opts_.lowercase, sentence);
    if (!sentence.empty()) return true;
  }
  return false;
}

// --- Vocabulary construction ------------------------------------------------

void VocabBuilder::add(std::string_view token) {
  auto it = counts_
                .try_emplace(std::string(token),
                             std::pair<uint64_t, uint64_t>{0, seen_})
                .first;
  ++it->second.first;
  ++seen_;
}

Vocabulary VocabBuilder::finish(uint64_t min_count) {
  if (seen_ == 0) throw std::runtime_error("empty corpus");

  struct Entry {
    const std::string* word;
    uint64_t count;
    uint64_t first_seen;
  };
  std::vector<Entry> retained;
  retained.reserve(counts_.size());
  for (const auto& [word, cf] : counts_)
    if (cf.first >= min_count) retained.push_back({&word, cf.first, cf.second});
  if (retained.empty())
    throw std::runtime_error("vocabulary empty after pruning");

  std::sort(retained.begin(), retained.end(), [](const Entry& a, const Entry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.first_seen < b.first_seen;
  });

  Vocabulary vocab;
  vocab.words.reserve(retained.size());
  vocab.counts.reserve(retained.size());
  for (const Entry& e : retained) {
    vocab.words.push_back(*e.word);
    vocab.counts.push_back(e.count);
    vocab.total_tokens += e.count;
  }
  vocab.rebuild_index();
  return vocab;
}

Vocabulary build_vocab(std::span<const std::string> tokens,
                       uint64_t min_count) {
  VocabBuilder b;
  for (const auto& t : tokens) b.add(t);
  return b.finish(min_count);
}

Vocabulary build_vocab(std::istream& in, uint64_t min_count,
                       TokenizerOptions opts) {
  VocabBuilder b;
  SentenceReader reader(in, opts);
  std::vector<std::string> sentence;
  while (reader.next(sentence))
    for (const auto& t : sentence) b.add(t);
  return b.finish(min_count);
}

Vocabulary build_vocab_files(std::span<const std::string> paths,
                             uint64_t min_count, TokenizerOptions opts) {
  VocabBuilder b;
  std::vector<std::string> sentence;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    SentenceReader reader(in, opts);
    while (reader.next(sentence))
      for (const auto& t : sentence) b.add(t);
  }
  return b.finish(min_count);
}

// --- Encoding ---------------------------------------------------------------

namespace {

struct Encoder {
  const Vocabulary& vocab;
  EncodedCorpus out;
  uint64_t sentence_start = 0;

  explicit Encoder(const Vocabulary& v) : vocab(v) {
    out.sentence_offsets.push_back(0);
  }
  void add(std::string_view token) {
    if (auto id = vocab.lookup(token)) out.tokens.push_back(*id);
  }
  void end_sentence() {
    if (out.tokens.size() > sentence_start) {
      sentence_start = out.tokens.size();
      out.sentence_offsets.push_back(sentence_start);
    }
  }
  EncodedCorpus finish() {
    end_sentence();
    return std::move(out);
  }
};

}  // namespace

EncodedCorpus encode(std::span<const std::string> tokens,
                     const Vocabulary& vocab) {
  Encoder enc(vocab);
  for (const auto& t : tokens) enc.add(t);
  return enc.finish();
}

EncodedCorpus encode(std::istream& in, const Vocabulary& vocab,
                     TokenizerOptions opts) {
  Encoder enc(vocab);
  SentenceReader reader(in, opts);
  std::vector<std::string> sentence;
  while (reader.next(sentence)) {
    for (const auto& t : sentence) enc.add(t);
    enc.end_sentence();
  }
  return enc.finish();
}

EncodedCorpus encode_files(std::span<const std::string> paths,
                           const Vocabulary& vocab, TokenizerOptions opts) {
  Encoder enc(vocab);
  std::vector<std::string> sentence;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    SentenceReader reader(in, opts);
    while (reader.next(sentence)) {
      for (const auto& t : sentence) enc.add(t);
      enc.end_sentence();
    }
  }
  return enc.finish();
}

// --- Noise table ------------------------------------------------------------

NegativeSamplingTable::NegativeSamplingTable(const Vocabulary& vocab) {
  const size_t n = vocab.size();
  prob_.resize(n);
  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    prob_[i] = std::pow(double(vocab.counts[i]), kPower);
    z += prob_[i];
  }
  for (auto& p : prob_) p /= z;

  // Vose alias construction.
  threshold_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<uint32_t> small, large;
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = prob_[i] * double(n);
    (scaled[i] < 1.0 ? small : large).push_back(uint32_t(i));
  }
  while (!small.empty() && !large.empty()) {
    const uint32_t s = small.back();
    const uint32_t l = large.back();
    small.pop_back();
    large.pop_back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (uint32_t i : large) threshold_[i] = 1.0;
  for (uint32_t i : small) threshold_[i] = 1.0;  // numerical leftovers
}

double NegativeSamplingTable::implied_prob(WordId w) const {
  const size_t n = threshold_.size();
  double p = threshold_[w];
  for (size_t i = 0; i < n; ++i)
    if (alias_[i] == w && threshold_[i] < 1.0) p += 1.0 - threshold_[i];
  return p / double(n);
}

// --- Sampling ---------------------------------------------------------------

void gather_window(std::span<const WordId> sentence, size_t idx,
                   uint32_t radius, std::vector<WordId>& out) {
  out.clear();
  const size_t lo = idx >= radius ? idx - radius : 0;
  const size_t hi = std::min(sentence.size(), idx + radius + 1);
  for (size_t i = lo; i < hi; ++i)
    if (i != idx) out.push_back(sentence[i]);
}

std::vector<WordId> sample_window(uint64_t pos, const EncodedCorpus& corpus,
                                  uint32_t max_window, Rng& rng) {
  const auto [begin, end] = corpus.sentence_bounds(pos);
  const uint32_t radius = 1 + rng.bounded(max_window);
  std::vector<WordId> out;
  gather_window(std::span<const WordId>(corpus.tokens).subspan(begin, end - begin),
                size_t(pos - begin), radius, out);
  return out;
}

void sample_negatives(std::span<const WordId> context, uint32_t S,
                      const NegativeSamplingTable& table, Rng& rng,
                      std::vector<WordId>& out) {
  out.clear();
  out.reserve(context.size() * S);
  for (size_t i = 0; i < context.size() * S; ++i) out.push_back(table.sample(rng));
}

std::vector<WordId> sample_negatives(std::span<const WordId> context,
                                     uint32_t S,
                                     const NegativeSamplingTable& table,
                                     Rng& rng) {
  std::vector<WordId> out;
  sample_negatives(context, S, table, rng, out);
  return out;
}

}  // namespace msense
