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
#include "msense/model.hpp"

#include <cmath>
#include <cstring>
#include <new>
#include <stdexcept>

#include "msense/vecmath.hpp"

namespace msense {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::skipgram: return "skipgram";
    case Mode::mssg: return "mssg";
    case Mode::npmssg: return "npmssg";
  }
  return "?";
}

Mode mode_from_name(std::string_view name) {
  if (name == "skipgram") return Mode::skipgram;
  if (name == "mssg") return Mode::mssg;
  if (name == "npmssg") return Mode::npmssg;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

void HyperParams::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (mode == Mode::mssg && senses < 1)
    throw std::invalid_argument("mssg mode requires senses (K) >= 1");
  if (lambda < -1.0f || lambda > 1.0f)
    throw std::invalid_argument("lambda must lie in [-1, 1]");
  if (!(lr0 > 0.0f)) throw std::invalid_argument("lr0 must be > 0");
  if (window < 1) throw std::invalid_argument("window (N) must be >= 1");
  if (negatives < 1) throw std::invalid_argument("negatives (S) must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (subsample < 0.0f)
    throw std::invalid_argument("subsample threshold must be >= 0");
}

namespace {

template <typename T>
std::vector<T> checked_alloc(size_t n, const char* what) {
  try {
    return std::vector<T>(n);
  } catch (const std::bad_alloc&) {
    throw std::runtime_error("allocation of " +
                             std::to_string(n * sizeof(T)) + " bytes for " +
                             what + " failed");
  }
}

}  // namespace

ModelParams::ModelParams(size_t vocab_size, const HyperParams& hp)
    : hp_(hp), vocab_(vocab_size), d_(hp.dim),
      dynamic_(hp.mode == Mode::npmssg) {
  hp_.validate();
  global_ = checked_alloc<float>(vocab_ * d_, "global vectors");
  global_ada_ = checked_alloc<float>(vocab_ * d_, "global AdaGrad state");
  if (dynamic_) {
    dyn_ = std::vector<WordSenses>(vocab_);
    return;
  }
  k_fixed_.resize(vocab_);
  offset_.resize(vocab_ + 1, 0);
  for (size_t w = 0; w < vocab_; ++w) {
    k_fixed_[w] = sense_limit(WordId(w));
    offset_[w + 1] = offset_[w] + k_fixed_[w];
  }
  const size_t slots = offset_[vocab_];
  sense_ = checked_alloc<float>(slots * d_, "sense vectors");
  sense_ada_ = checked_alloc<float>(slots * d_, "sense AdaGrad state");
  csum_ = checked_alloc<float>(slots * d_, "cluster sums");
  ccount_ = std::vector<std::atomic<uint64_t>>(slots);
}

ModelParams ModelParams::init(size_t vocab_size, const HyperParams& hp,
                              Rng& rng) {
  ModelParams p(vocab_size, hp);
  p.randomize(rng);
  return p;
}

void ModelParams::randomize(Rng& rng) {
  const float b = 0.5f / float(d_);
  for (auto& x : global_) x = rng.uniform(-b, b);
  if (!dynamic_)
    for (auto& x : sense_) x = rng.uniform(-b, b);
  // npmssg: senses are created on first occurrence during training.
}

uint32_t ModelParams::sense_limit(WordId w) const {
  const bool capped_single =
      hp_.multi_sense_top_m > 0 && w >= hp_.multi_sense_top_m;
  switch (hp_.mode) {
    case Mode::skipgram: return 1;
    case Mode::mssg: return capped_single ? 1 : hp_.senses;
    case Mode::npmssg:
      if (capped_single) return 1;
      return hp_.max_senses == 0 ? std::numeric_limits<uint32_t>::max()
                                 : hp_.max_senses;
  }
  return 1;
}

uint32_t ModelParams::num_senses(WordId w) const {
  return dynamic_ ? dyn_[w].k.load(std::memory_order_acquire) : k_fixed_[w];
}

const ModelParams::SenseSlot* ModelParams::slot(WordId w, uint32_t s) const {
  return dyn_[w].view.load(std::memory_order_acquire)[s];
}
ModelParams::SenseSlot* ModelParams::slot(WordId w, uint32_t s) {
  return dyn_[w].view.load(std::memory_order_acquire)[s];
}

std::span<float> ModelParams::sense_vector(WordId w, uint32_t s) {
  if (dynamic_) return {slot(w, s)->data.get(), d_};
  return {sense_.data() + (offset_[w] + s) * d_, d_};
}
std::span<const float> ModelParams::sense_vector(WordId w, uint32_t s) const {
  if (dynamic_) return {slot(w, s)->data.get(), d_};
  return {sense_.data() + (offset_[w] + s) * d_, d_};
}
std::span<float> ModelParams::sense_adagrad(WordId w, uint32_t s) {
  if (dynamic_) return {slot(w, s)->data.get() + d_, d_};
  return {sense_ada_.data() + (offset_[w] + s) * d_, d_};
}
std::span<const float> ModelParams::sense_adagrad(WordId w, uint32_t s) const {
  if (dynamic_) return {slot(w, s)->data.get() + d_, d_};
  return {sense_ada_.data() + (offset_[w] + s) * d_, d_};
}
std::span<float> ModelParams::cluster_sum(WordId w, uint32_t s) {
  if (dynamic_) return {slot(w, s)->data.get() + 2 * size_t(d_), d_};
  return {csum_.data() + (offset_[w] + s) * d_, d_};
}
std::span<const float> ModelParams::cluster_sum(WordId w, uint32_t s) const {
  if (dynamic_) return {slot(w, s)->data.get() + 2 * size_t(d_), d_};
  return {csum_.data() + (offset_[w] + s) * d_, d_};
}

uint64_t ModelParams::cluster_count(WordId w, uint32_t s) const {
  if (dynamic_) return slot(w, s)->count.load(std::memory_order_relaxed);
  return ccount_[offset_[w] + s].load(std::memory_order_relaxed);
}

void ModelParams::set_cluster_count(WordId w, uint32_t s, uint64_t v) {
  if (dynamic_)
    slot(w, s)->count.store(v, std::memory_order_relaxed);
  else
    ccount_[offset_[w] + s].store(v, std::memory_order_relaxed);
}

void ModelParams::add_context_to_cluster(WordId w, uint32_t s,
                                         std::span<const float> ctx) {
  auto sum = cluster_sum(w, s);
  for (uint32_t i = 0; i < d_; ++i) sum[i] += ctx[i];
  if (dynamic_)
    slot(w, s)->count.fetch_add(1, std::memory_order_relaxed);
  else
    ccount_[offset_[w] + s].fetch_add(1, std::memory_order_relaxed);
}

void ModelParams::center(WordId w, uint32_t s, std::span<float> out) const {
  const uint64_t n = cluster_count(w, s);
  auto sum = cluster_sum(w, s);
  if (n == 0) {
    std::fill(out.begin(), out.end(), 0.0f);
    return;
  }
  const float inv = 1.0f / float(n);
  for (uint32_t i = 0; i < d_; ++i) out[i] = sum[i] * inv;
}

double ModelParams::center_cosine(WordId w, uint32_t s,
                                  std::span<const float> v) const {
  if (cluster_count(w, s) == 0) return 0.0;
  return cosine(cluster_sum(w, s), v);
}

uint32_t ModelParams::append_sense(WordId w, Rng* rng) {
  WordSenses& ws = dyn_[w];
  while (ws.lock.test_and_set(std::memory_order_acquire)) {}
  const uint32_t k = ws.k.load(std::memory_order_relaxed);

  auto slot_ptr = std::make_unique<SenseSlot>();
  slot_ptr->data = std::make_unique<float[]>(3 * size_t(d_));
  std::memset(slot_ptr->data.get(), 0, 3 * size_t(d_) * sizeof(float));
  if (rng) {
    const float b = 0.5f / float(d_);
    for (uint32_t i = 0; i < d_; ++i)
      slot_ptr->data[i] = rng->uniform(-b, b);
  }

  if (k >= ws.capacity) {
    // Grow the pointer array. Superseded arrays stay alive in `views` so a
    // reader holding a stale pointer still sees valid (older) slots.
    const uint32_t cap = ws.capacity == 0 ? 4 : ws.capacity * 2;
    auto view = std::make_unique<SenseSlot*[]>(cap);
    SenseSlot** old = ws.view.load(std::memory_order_relaxed);
    for (uint32_t i = 0; i < k; ++i) view[i] = old[i];
    view[k] = slot_ptr.get();
    ws.view.store(view.get(), std::memory_order_release);
    ws.views.push_back(std::move(view));
    ws.capacity = cap;
  } else {
    ws.view.load(std::memory_order_relaxed)[k] = slot_ptr.get();
  }
  ws.slots.push_back(std::move(slot_ptr));
  ws.k.store(k + 1, std::memory_order_release);
  ws.lock.clear(std::memory_order_release);
  return k;
}

uint32_t ModelParams::add_sense_random(WordId w, Rng& rng) {
  if (!dynamic_)
    throw std::logic_error("add_sense_random: fixed-sense storage");
  return append_sense(w, &rng);
}

void ModelParams::ensure_senses(WordId w, uint32_t k) {
  if (!dynamic_)
    throw std::logic_error("ensure_senses: fixed-sense storage");
  while (num_senses(w) < k) append_sense(w, nullptr);
}

uint64_t ModelParams::total_senses() const {
  uint64_t total = 0;
  for (size_t w = 0; w < vocab_; ++w) total += num_senses(WordId(w));
  return total;
}

std::map<uint32_t, uint64_t> ModelParams::sense_count_histogram() const {
  std::map<uint32_t, uint64_t> hist;
  for (size_t w = 0; w < vocab_; ++w) ++hist[num_senses(WordId(w))];
  return hist;
}

bool ModelParams::all_finite() const {
  auto ok = [](std::span<const float> v) {
    for (float x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  for (size_t w = 0; w < vocab_; ++w) {
    if (!ok(global(WordId(w)))) return false;
    for (uint32_t s = 0; s < num_senses(WordId(w)); ++s) {
      if (!ok(sense_vector(WordId(w), s))) return false;
      if (!ok(cluster_sum(WordId(w), s))) return false;
      if (!ok(sense_adagrad(WordId(w), s))) return false;
    }
  }
  return true;
}

namespace {
bool bit_equal(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}
}  // namespace

bool ModelParams::same_vectors(const ModelParams& other) const {
  if (vocab_ != other.vocab_ || d_ != other.d_) return false;
  for (size_t w = 0; w < vocab_; ++w) {
    const auto id = WordId(w);
    if (!bit_equal(global(id), other.global(id))) return false;
    if (num_senses(id) != other.num_senses(id)) return false;
    for (uint32_t s = 0; s < num_senses(id); ++s)
      if (!bit_equal(sense_vector(id, s), other.sense_vector(id, s)))
        return false;
  }
  return true;
}

bool ModelParams::same_state(const ModelParams& other,
                             bool with_optimizer) const {
  if (!same_vectors(other)) return false;
  for (size_t w = 0; w < vocab_; ++w) {
    const auto id = WordId(w);
    for (uint32_t s = 0; s < num_senses(id); ++s) {
      if (cluster_count(id, s) != other.cluster_count(id, s)) return false;
      if (!bit_equal(cluster_sum(id, s), other.cluster_sum(id, s)))
        return false;
      if (with_optimizer &&
          !bit_equal(sense_adagrad(id, s), other.sense_adagrad(id, s)))
        return false;
    }
    if (with_optimizer) {
      std::span<const float> a{global_ada_.data() + w * d_, d_};
      std::span<const float> b{other.global_ada_.data() + w * d_, d_};
      if (!bit_equal(a, b)) return false;
    }
  }
  return true;
}

// --- Context & sense operations ---------------------------------------------

void context_vector(std::span<const WordId> context_ids,
                    const ModelParams& params, std::span<float> out) {
  if (context_ids.empty()) throw std::invalid_argument("no context");
  std::fill(out.begin(), out.end(), 0.0f);
  for (WordId c : context_ids) {
    auto g = params.global(c);
    for (size_t i = 0; i < out.size(); ++i) out[i] += g[i];
  }
  const float inv = 1.0f / float(context_ids.size());
  for (auto& x : out) x *= inv;
}

ContextVector context_vector(std::span<const WordId> context_ids,
                             const ModelParams& params) {
  ContextVector cv;
  cv.v.resize(params.dim());
  context_vector(context_ids, params, cv.v);
  cv.width = uint32_t(context_ids.size());
  return cv;
}

namespace {

/// Best sense by center cosine. Ties are resolved uniformly at random but
/// the rng is consumed only when more than one maximizer exists.
uint32_t best_sense(const ModelParams& params, WordId w,
                    std::span<const float> ctx, Rng& rng, uint32_t k,
                    double* max_out) {
  double best = -2.0;
  uint32_t best_idx = 0;
  uint32_t ties = 0;
  for (uint32_t s = 0; s < k; ++s) {
    const double c = params.center_cosine(w, s, ctx);
    if (c > best) {
      best = c;
      best_idx = s;
      ties = 1;
    } else if (c == best) {
      ++ties;
    }
  }
  if (max_out) *max_out = best;
  if (ties <= 1) return best_idx;
  uint32_t pick = rng.bounded(ties);
  for (uint32_t s = 0; s < k; ++s) {
    if (params.center_cosine(w, s, ctx) == best) {
      if (pick == 0) return s;
      --pick;
    }
  }
  // racing cluster updates can shrink the tie set between the two passes
  return best_idx;
}

}  // namespace

uint32_t predict_sense(const ModelParams& params, WordId w,
                       std::span<const float> ctx, Rng& rng) {
  const uint32_t k = params.num_senses(w);
  if (k == 0) throw std::logic_error("predict_sense: word has no senses");
  if (k == 1) return 0;
  return best_sense(params, w, ctx, rng, k, nullptr);
}

SenseAssignment npmssg_assign(ModelParams& params, WordId w,
                              std::span<const float> ctx, Rng& rng) {
  const uint32_t k = params.num_senses(w);
  if (k == 0) return {params.add_sense_random(w, rng), true};
  double max_cos = -2.0;
  const uint32_t nearest = best_sense(params, w, ctx, rng, k, &max_cos);
  if (max_cos < double(params.hp().lambda) && k < params.sense_limit(w))
    return {params.add_sense_random(w, rng), true};
  return {nearest, false};
}

}  // namespace msense
