// Brute-force reference implementations used to check the library. These
// deliberately re-derive everything from first principles in double
// precision and share no code with the implementation under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double cosine(const Vec& a, const Vec& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline Vec to_vec(std::span<const float> v) {
  return Vec(v.begin(), v.end());
}

inline Vec mean(const std::vector<Vec>& vs) {
  Vec m(vs.front().size(), 0.0);
  for (const auto& v : vs)
    for (size_t i = 0; i < m.size(); ++i) m[i] += v[i];
  for (auto& x : m) x /= double(vs.size());
  return m;
}

// --- Logistic objective + finite differences ---------------------------------

inline double log_sigmoid(double x) {
  // log(1/(1+e^-x)) = -log(1+e^-x)
  if (x > 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

/// J = sum_ctx log s(center.g_c) + sum_noise log(1 - s(center.g_n)).
/// `globals` maps word id -> global vector.
inline double objective(const Vec& center, const std::vector<Vec>& globals,
                        const std::vector<uint32_t>& ctx,
                        const std::vector<uint32_t>& noise) {
  double j = 0;
  for (uint32_t c : ctx) j += log_sigmoid(dot(center, globals[c]));
  for (uint32_t c : noise) j += log_sigmoid(-dot(center, globals[c]));
  return j;
}

struct FdGradients {
  Vec center;                    // dJ/d center
  std::vector<Vec> globals;      // dJ/d global[w], all words
};

inline FdGradients finite_difference(const Vec& center,
                                     const std::vector<Vec>& globals,
                                     const std::vector<uint32_t>& ctx,
                                     const std::vector<uint32_t>& noise,
                                     double h = 1e-5) {
  FdGradients g;
  g.center.resize(center.size());
  Vec c = center;
  for (size_t i = 0; i < c.size(); ++i) {
    const double keep = c[i];
    c[i] = keep + h;
    const double up = objective(c, globals, ctx, noise);
    c[i] = keep - h;
    const double dn = objective(c, globals, ctx, noise);
    c[i] = keep;
    g.center[i] = (up - dn) / (2 * h);
  }
  auto gl = globals;
  g.globals.resize(globals.size());
  for (size_t w = 0; w < gl.size(); ++w) {
    g.globals[w].resize(gl[w].size());
    for (size_t i = 0; i < gl[w].size(); ++i) {
      const double keep = gl[w][i];
      gl[w][i] = keep + h;
      const double up = objective(center, gl, ctx, noise);
      gl[w][i] = keep - h;
      const double dn = objective(center, gl, ctx, noise);
      gl[w][i] = keep;
      g.globals[w][i] = (up - dn) / (2 * h);
    }
  }
  return g;
}

// --- Sense posterior & similarity metrics -------------------------------------

inline Vec posterior(const std::vector<Vec>& centers, const Vec& ctx,
                     double eps = 1e-6) {
  Vec p(centers.size());
  double z = 0;
  for (size_t k = 0; k < centers.size(); ++k) {
    const double dist = 1.0 - cosine(centers[k], ctx);
    p[k] = 1.0 / (dist + eps);
    z += p[k];
  }
  for (auto& x : p) x /= z;
  return p;
}

inline double avg_sim(const std::vector<Vec>& senses1,
                      const std::vector<Vec>& senses2) {
  double s = 0;
  for (const auto& a : senses1)
    for (const auto& b : senses2) s += cosine(a, b);
  return s / (double(senses1.size()) * double(senses2.size()));
}

inline double avg_sim_c(const std::vector<Vec>& senses1, const Vec& post1,
                        const std::vector<Vec>& senses2, const Vec& post2) {
  double s = 0;
  for (size_t i = 0; i < senses1.size(); ++i)
    for (size_t j = 0; j < senses2.size(); ++j)
      s += post1[i] * post2[j] * cosine(senses1[i], senses2[j]);
  return s;
}

inline double local_sim(const std::vector<Vec>& senses1, const Vec& post1,
                        const std::vector<Vec>& senses2, const Vec& post2) {
  const size_t k1 = size_t(std::max_element(post1.begin(), post1.end()) -
                           post1.begin());
  const size_t k2 = size_t(std::max_element(post2.begin(), post2.end()) -
                           post2.begin());
  return cosine(senses1[k1], senses2[k2]);
}

/// Tie-free closed form: 1 - 6*sum d^2 / (n(n^2-1)). Valid only when both
/// inputs are duplicate-free.
inline double spearman_tiefree(const Vec& a, const Vec& b) {
  const size_t n = a.size();
  auto rank_of = [n](const Vec& x) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t p, size_t q) { return x[p] < x[q]; });
    Vec r(n);
    for (size_t i = 0; i < n; ++i) r[idx[i]] = double(i + 1);
    return r;
  };
  const Vec ra = rank_of(a), rb = rank_of(b);
  double d2 = 0;
  for (size_t i = 0; i < n; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (double(n) * (double(n) * double(n) - 1.0));
}

/// Full-scan neighbor ranking: cosine(query, candidate_global), descending,
/// ties by ascending id, excluding `self`.
inline std::vector<std::pair<uint32_t, double>> nearest(
    const Vec& query, const std::vector<Vec>& globals, uint32_t self,
    size_t top_n) {
  std::vector<std::pair<uint32_t, double>> all;
  for (uint32_t w = 0; w < globals.size(); ++w) {
    if (w == self) continue;
    all.emplace_back(w, cosine(query, globals[w]));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (all.size() > top_n) all.resize(top_n);
  return all;
}

/// 3CosAdd analogy prediction over the full vocabulary.
inline uint32_t analogy(const std::vector<Vec>& globals, uint32_t a,
                        uint32_t b, uint32_t c) {
  Vec target(globals[0].size());
  for (size_t i = 0; i < target.size(); ++i)
    target[i] = globals[b][i] - globals[a][i] + globals[c][i];
  double best = -2;
  uint32_t best_w = 0;
  for (uint32_t w = 0; w < globals.size(); ++w) {
    if (w == a || w == b || w == c) continue;
    const double s = cosine(target, globals[w]);
    if (s > best) {
      best = s;
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace oracle
