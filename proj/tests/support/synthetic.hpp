// Two-topic synthetic corpus generator with fused pseudo-polysemous words.
// Each sentence draws i.i.d. from one topic's Zipf distribution, so words
// co-occur only within their topic. Twenty frequent word pairs (one word per
// topic) are fused into `poly##` pseudo-words that therefore appear in both
// kinds of context; a multi-sense model should pull their senses apart.
#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "msense/rng.hpp"

namespace synthetic {

struct Config {
  size_t topic_words = 400;    // per topic
  size_t fused_pairs = 20;
  size_t fuse_rank_from = 5;   // source words at ranks [from, from+pairs)
  size_t sentences = 300000;
  size_t sentence_len = 18;
  uint64_t seed = 1234;
};

class TopicSampler {
 public:
  TopicSampler(char prefix, const Config& cfg) : cfg_(cfg) {
    cdf_.resize(cfg.topic_words);
    double z = 0;
    for (size_t r = 0; r < cfg.topic_words; ++r) {
      z += 1.0 / double(r + 1);  // Zipf, s = 1
      cdf_[r] = z;
    }
    for (auto& x : cdf_) x /= z;
    words_.reserve(cfg.topic_words);
    char buf[16];
    for (size_t r = 0; r < cfg.topic_words; ++r) {
      std::snprintf(buf, sizeof(buf), "%c%03zu", prefix, r);
      words_.emplace_back(buf);
    }
  }

  /// Rank draw by inverse CDF.
  size_t draw_rank(msense::Rng& rng) const {
    const double u = rng.uniform01();
    size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      const size_t mid = (lo + hi) / 2;
      if (cdf_[mid] < u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

  const std::string& word(size_t rank) const { return words_[rank]; }

 private:
  Config cfg_;
  std::vector<double> cdf_;
  std::vector<std::string> words_;
};

struct Corpus {
  std::string text;  // newline-delimited sentences
  std::vector<std::string> pseudo_words;
  Config cfg;

  static bool is_pseudo(const std::string& w) {
    return w.rfind("poly", 0) == 0;
  }
  /// 'a' or 'b' for topic words, 'p' for pseudo-words.
  static char topic_of(const std::string& w) {
    return is_pseudo(w) ? 'p' : w[0];
  }
};

inline std::string pseudo_name(size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "poly%02zu", i);
  return buf;
}

/// Emits one token of `topic`, applying the pseudo-word fusion.
inline const std::string& emit(const TopicSampler& sampler, size_t rank,
                               const Config& cfg,
                               const std::vector<std::string>& pseudo) {
  if (rank >= cfg.fuse_rank_from && rank < cfg.fuse_rank_from + cfg.fused_pairs)
    return pseudo[rank - cfg.fuse_rank_from];
  return sampler.word(rank);
}

inline Corpus generate(const Config& cfg = {}) {
  Corpus corpus;
  corpus.cfg = cfg;
  for (size_t i = 0; i < cfg.fused_pairs; ++i)
    corpus.pseudo_words.push_back(pseudo_name(i));

  TopicSampler a('a', cfg), b('b', cfg);
  msense::Rng rng(cfg.seed);
  corpus.text.reserve(cfg.sentences * cfg.sentence_len * 6);
  for (size_t s = 0; s < cfg.sentences; ++s) {
    const TopicSampler& topic = (s % 2 == 0) ? a : b;
    for (size_t t = 0; t < cfg.sentence_len; ++t) {
      if (t) corpus.text += ' ';
      corpus.text +=
          emit(topic, topic.draw_rank(rng), cfg, corpus.pseudo_words);
    }
    corpus.text += '\n';
  }
  return corpus;
}

/// One sentence from the given topic with `word` planted in the middle;
/// returns the token list.
inline std::vector<std::string> context_sentence(const Corpus& corpus,
                                                 char topic,
                                                 const std::string& word,
                                                 msense::Rng& rng) {
  const Config& cfg = corpus.cfg;
  TopicSampler sampler(topic, cfg);
  std::vector<std::string> toks;
  for (size_t t = 0; t < cfg.sentence_len; ++t)
    toks.push_back(emit(sampler, sampler.draw_rank(rng), cfg,
                        corpus.pseudo_words));
  toks[cfg.sentence_len / 2] = word;
  return toks;
}

}  // namespace synthetic
