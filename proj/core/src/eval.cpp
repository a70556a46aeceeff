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
#include "msense/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "msense/vecmath.hpp"

namespace msense {

std::vector<double> sense_posterior(const ModelParams& params, WordId w,
                                    std::span<const float> ctx) {
  const uint32_t k = params.num_senses(w);
  if (k == 0) throw std::runtime_error("no senses");
  std::vector<double> probs(k);
  double z = 0.0;
  for (uint32_t s = 0; s < k; ++s) {
    const double dist = 1.0 - params.center_cosine(w, s, ctx);
    probs[s] = 1.0 / (dist + kPosteriorEps);
    z += probs[s];
  }
  for (auto& p : probs) p /= z;
  return probs;
}

double global_sim(const ModelParams& params, WordId w1, WordId w2) {
  return cosine(params.global(w1), params.global(w2));
}

double avg_sim(const ModelParams& params, WordId w1, WordId w2) {
  const uint32_t k1 = params.num_senses(w1);
  const uint32_t k2 = params.num_senses(w2);
  if (k1 == 0 || k2 == 0) throw std::runtime_error("no senses");
  double sum = 0.0;
  for (uint32_t i = 0; i < k1; ++i)
    for (uint32_t j = 0; j < k2; ++j)
      sum += cosine(params.sense_vector(w1, i), params.sense_vector(w2, j));
  return sum / (double(k1) * double(k2));
}

double avg_sim_c_weighted(const ModelParams& params, WordId w1,
                          std::span<const double> post1, WordId w2,
                          std::span<const double> post2) {
  double sum = 0.0;
  for (size_t i = 0; i < post1.size(); ++i)
    for (size_t j = 0; j < post2.size(); ++j)
      sum += post1[i] * post2[j] *
             cosine(params.sense_vector(w1, uint32_t(i)),
                    params.sense_vector(w2, uint32_t(j)));
  return sum;
}

double avg_sim_c(const ModelParams& params, WordId w1,
                 std::span<const float> ctx1, WordId w2,
                 std::span<const float> ctx2) {
  const auto p1 = sense_posterior(params, w1, ctx1);
  const auto p2 = sense_posterior(params, w2, ctx2);
  return avg_sim_c_weighted(params, w1, p1, w2, p2);
}

namespace {
uint32_t posterior_argmax(std::span<const double> probs) {
  uint32_t best = 0;
  for (uint32_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;  // ties keep the lowest index
  return best;
}
}  // namespace

double local_sim(const ModelParams& params, WordId w1,
                 std::span<const float> ctx1, WordId w2,
                 std::span<const float> ctx2) {
  const auto p1 = sense_posterior(params, w1, ctx1);
  const auto p2 = sense_posterior(params, w2, ctx2);
  return cosine(params.sense_vector(w1, posterior_argmax(p1)),
                params.sense_vector(w2, posterior_argmax(p2)));
}

// --- Spearman ----------------------------------------------------------------

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (double(i) + double(j)) / 2.0 + 1.0;  // 1-based
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("spearman: length mismatch");
  if (a.size() < 2)
    throw std::invalid_argument("spearman: need at least two points");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const size_t n = ra.size();
  const double mean = double(n + 1) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

// --- Dataset loaders -----------------------------------------------------------

namespace {

std::string normalize(std::string s, const TokenizerOptions& opts) {
  if (opts.lowercase)
    for (char& c : s)
      if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
  return s;
}

std::vector<std::string> tokenize_text(const std::string& text,
                                       const TokenizerOptions& opts) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(normalize(tok, opts));
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

/// Strips the <b>...</b>-delimited target from an SCWS context and returns
/// the remaining tokens.
std::vector<std::string> scws_context_tokens(const std::string& context,
                                             const TokenizerOptions& opts) {
  std::string cleaned;
  size_t pos = 0;
  while (pos < context.size()) {
    const size_t open = context.find("<b>", pos);
    if (open == std::string::npos) {
      cleaned.append(context, pos, std::string::npos);
      break;
    }
    cleaned.append(context, pos, open - pos);
    const size_t close = context.find("</b>", open);
    if (close == std::string::npos) break;  // unbalanced; drop the rest
    cleaned.push_back(' ');
    pos = close + 4;
  }
  return tokenize_text(cleaned, opts);
}

bool parse_double(const std::string& s, double& out) {
  try {
    size_t idx = 0;
    out = std::stod(s, &idx);
    while (idx < s.size() && std::isspace(static_cast<unsigned char>(s[idx])))
      ++idx;
    return idx == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_integer(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

std::vector<JudgmentRecord> load_wordsim_csv(const std::string& path,
                                             TokenizerOptions opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<JudgmentRecord> records;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    const char sep = line.find(',') != std::string::npos ? ',' : '\t';
    while (std::getline(ss, f, sep)) fields.push_back(f);
    double score = 0.0;
    if (fields.size() < 3 || !parse_double(fields[2], score)) {
      if (first) {  // tolerated header
        first = false;
        continue;
      }
      throw std::runtime_error(path + ": malformed line: " + line);
    }
    first = false;
    JudgmentRecord rec;
    rec.word1 = normalize(fields[0], opts);
    rec.word2 = normalize(fields[1], opts);
    rec.human_score = score;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<JudgmentRecord> load_scws_tsv(const std::string& path,
                                          TokenizerOptions opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<JudgmentRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    // Optional leading integer id.
    size_t base = 0;
    if (fields.size() >= 8 && parse_integer(fields[0])) base = 1;
    if (fields.size() < base + 7)
      throw std::runtime_error(path + ": malformed record: " + line);
    JudgmentRecord rec;
    rec.word1 = normalize(fields[base + 0], opts);
    rec.word2 = normalize(fields[base + 2], opts);
    rec.context1 = scws_context_tokens(fields[base + 4], opts);
    rec.context2 = scws_context_tokens(fields[base + 5], opts);
    if (!parse_double(fields[base + 6], rec.human_score))
      throw std::runtime_error(path + ": bad score in record: " + line);
    records.push_back(std::move(rec));
  }
  return records;
}

// --- Metric dispatch ------------------------------------------------------------

const char* metric_name(SimMetric m) {
  switch (m) {
    case SimMetric::global_sim: return "globalSim";
    case SimMetric::avg_sim: return "avgSim";
    case SimMetric::avg_sim_c: return "avgSimC";
    case SimMetric::local_sim: return "localSim";
  }
  return "?";
}

SimMetric metric_from_name(std::string_view name) {
  if (name == "globalSim") return SimMetric::global_sim;
  if (name == "avgSim") return SimMetric::avg_sim;
  if (name == "avgSimC") return SimMetric::avg_sim_c;
  if (name == "localSim") return SimMetric::local_sim;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

bool metric_needs_context(SimMetric m) {
  return m == SimMetric::avg_sim_c || m == SimMetric::local_sim;
}

std::optional<std::vector<float>> eval_context_vector(
    const ModelParams& params, const Vocabulary& vocab,
    std::span<const std::string> context_tokens) {
  std::vector<WordId> ids;
  ids.reserve(context_tokens.size());
  for (const auto& t : context_tokens)
    if (auto id = vocab.lookup(t)) ids.push_back(*id);
  if (ids.empty()) return std::nullopt;
  std::vector<float> v(params.dim());
  context_vector(ids, params, v);
  return v;
}

SimilarityResult evaluate_similarity(std::span<const JudgmentRecord> records,
                                     SimMetric metric,
                                     const ModelParams& params,
                                     const Vocabulary& vocab) {
  const bool needs_ctx = metric_needs_context(metric);
  if (needs_ctx) {
    const bool any_ctx =
        std::any_of(records.begin(), records.end(),
                    [](const JudgmentRecord& r) { return r.contextual(); });
    if (!any_ctx)
      throw std::invalid_argument(
          std::string(metric_name(metric)) +
          " requires a contextual dataset (no contexts present)");
  }

  SimilarityResult result;
  std::vector<double> model_scores, human_scores;
  for (const auto& rec : records) {
    const auto w1 = vocab.lookup(rec.word1);
    const auto w2 = vocab.lookup(rec.word2);
    if (!w1 || !w2) {
      ++result.pairs_skipped;
      continue;
    }
    if (metric != SimMetric::global_sim &&
        (params.num_senses(*w1) == 0 || params.num_senses(*w2) == 0)) {
      ++result.pairs_skipped;
      continue;
    }
    double score = 0.0;
    if (needs_ctx) {
      const auto ctx1 = eval_context_vector(params, vocab, rec.context1);
      const auto ctx2 = eval_context_vector(params, vocab, rec.context2);
      if (!ctx1 || !ctx2) {
        ++result.pairs_skipped;
        continue;
      }
      score = metric == SimMetric::avg_sim_c
                  ? avg_sim_c(params, *w1, *ctx1, *w2, *ctx2)
                  : local_sim(params, *w1, *ctx1, *w2, *ctx2);
    } else {
      score = metric == SimMetric::global_sim ? global_sim(params, *w1, *w2)
                                              : avg_sim(params, *w1, *w2);
    }
    model_scores.push_back(score);
    human_scores.push_back(rec.human_score);
  }
  result.pairs_used = model_scores.size();
  if (model_scores.size() >= 2)
    result.rho_x100 = 100.0 * spearman(model_scores, human_scores);
  return result;
}

// --- Nearest neighbors -----------------------------------------------------------

std::vector<Neighbor> nearest_neighbors(const ModelParams& params,
                                        WordId query, int sense,
                                        size_t top_n) {
  if (query >= params.vocab_size())
    throw std::invalid_argument("nearest_neighbors: invalid word id");
  std::span<const float> qv;
  if (sense == kGlobalSense) {
    qv = params.global(query);
  } else {
    if (sense < 0 || uint32_t(sense) >= params.num_senses(query))
      throw std::invalid_argument("nearest_neighbors: no such sense");
    qv = params.sense_vector(query, uint32_t(sense));
  }
  std::vector<Neighbor> all;
  all.reserve(params.vocab_size() - 1);
  for (size_t w = 0; w < params.vocab_size(); ++w) {
    if (WordId(w) == query) continue;
    all.push_back({WordId(w), cosine(qv, params.global(WordId(w)))});
  }
  const size_t n = std::min(top_n, all.size());
  auto cmp = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + std::ptrdiff_t(n), all.end(),
                    cmp);
  all.resize(n);
  return all;
}

std::vector<std::string> nearest_spellings(const Vocabulary& vocab,
                                           std::string_view word, size_t n) {
  auto edit_distance = [](std::string_view a, std::string_view b) {
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), size_t{0});
    for (size_t i = 1; i <= a.size(); ++i) {
      cur[0] = i;
      for (size_t j = 1; j <= b.size(); ++j) {
        const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      }
      std::swap(prev, cur);
    }
    return prev[b.size()];
  };
  std::vector<std::pair<size_t, WordId>> scored;
  scored.reserve(vocab.size());
  for (WordId w = 0; w < vocab.size(); ++w)
    scored.emplace_back(edit_distance(word, vocab.words[w]), w);
  const size_t k = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(k),
                    scored.end());
  std::vector<std::string> out;
  for (size_t i = 0; i < k; ++i) out.push_back(vocab.words[scored[i].second]);
  return out;
}

// --- Analogy ---------------------------------------------------------------------

std::vector<AnalogyQuestion> load_analogy(const std::string& path,
                                          TokenizerOptions opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<AnalogyQuestion> questions;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == ':') continue;  // section header
    auto toks = tokenize_text(line, opts);
    if (toks.size() != 4) {
      std::fprintf(stderr, "warning: %s:%zu: expected 4 tokens, got %zu\n",
                   path.c_str(), lineno, toks.size());
      continue;
    }
    questions.push_back({toks[0], toks[1], toks[2], toks[3]});
  }
  return questions;
}

std::optional<WordId> analogy_predict(const ModelParams& params,
                                      const Vocabulary& vocab,
                                      const AnalogyQuestion& q) {
  const auto a = vocab.lookup(q.a), b = vocab.lookup(q.b),
             c = vocab.lookup(q.c);
  if (!a || !b || !c) return std::nullopt;
  const uint32_t d = params.dim();
  std::vector<float> target(d);
  auto va = params.global(*a), vb = params.global(*b), vc = params.global(*c);
  for (uint32_t i = 0; i < d; ++i) target[i] = vb[i] - va[i] + vc[i];

  double best = -2.0;
  std::optional<WordId> best_w;
  for (size_t w = 0; w < params.vocab_size(); ++w) {
    const auto id = WordId(w);
    if (id == *a || id == *b || id == *c) continue;
    const double sim = cosine(target, params.global(id));
    if (sim > best) {
      best = sim;
      best_w = id;
    }
  }
  return best_w;
}

AnalogyResult analogy_accuracy(std::span<const AnalogyQuestion> questions,
                               const ModelParams& params,
                               const Vocabulary& vocab) {
  AnalogyResult result;
  size_t correct = 0;
  for (const auto& q : questions) {
    const auto d = vocab.lookup(q.d);
    const auto pred = analogy_predict(params, vocab, q);
    if (!d || !pred) {
      ++result.skipped;
      continue;
    }
    ++result.used;
    if (*pred == *d) ++correct;
  }
  result.accuracy = result.used ? double(correct) / double(result.used) : 0.0;
  return result;
}

}  // namespace msense
