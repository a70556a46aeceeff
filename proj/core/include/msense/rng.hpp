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

namespace msense {

/// xoshiro256++ seeded through splitmix64. Self-contained so that seeded
/// runs are bit-reproducible across compilers and standard libraries,
/// which <random> distributions do not guarantee.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  /// Independent stream for (seed, worker, epoch). Workers re-seed at each
  /// epoch boundary so a checkpoint-resume replays the same draws.
  static Rng for_worker(uint64_t seed, uint32_t worker, uint64_t epoch) {
    uint64_t x = seed;
    uint64_t h = splitmix64(x);
    x = h ^ (0x9e3779b97f4a7c15ULL * (uint64_t(worker) + 1));
    h = splitmix64(x);
    x = h ^ (0xbf58476d1ce4e5b9ULL * (epoch + 1));
    return Rng(splitmix64(x));
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Unbiased draw from [0, n). Lemire's multiply-with-rejection.
  uint32_t bounded(uint32_t n) {
    uint64_t m = uint64_t(uint32_t(next())) * n;
    auto low = uint32_t(m);
    if (low < n) {
      const uint32_t threshold = uint32_t(-n) % n;
      while (low < threshold) {
        m = uint64_t(uint32_t(next())) * n;
        low = uint32_t(m);
      }
    }
    return uint32_t(m >> 32);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  /// Uniform float in [lo, hi).
  float uniform(float lo, float hi) {
    return lo + (hi - lo) * float(uniform01());
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  uint64_t state_[4];
};

}  // namespace msense
