// Copyright 2026 The mpqkd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPQKD_RNG_HPP
#define MPQKD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace mpqkd {

// Advances a splitmix64 state and returns the next output. Used to derive
// well-separated substream seeds; the constants are the reference ones.
inline uint64_t splitmix64_next(uint64_t &state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard, and all distributions are drawn
// through the helpers below rather than std::*_distribution, whose mapping
// from engine output is implementation-defined. This keeps golden outputs
// byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Stream for one fixed-size work block. Blocks are seeded independently of
  // how work is scheduled, so multithreaded runs reproduce single-threaded
  // output exactly.
  static Rng for_block(uint64_t seed, uint64_t block) {
    uint64_t state = seed ^ (0xA076BE5F6D2B9D2BULL + block * 0x9E3779B97F4A7C15ULL);
    uint64_t derived = splitmix64_next(state);
    derived ^= splitmix64_next(state);
    return Rng(derived);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in {0, ..., n - 1} for small n (phase slices, arm picks).
  // The scaling bias for n up to a few thousand is far below 2^-40.
  uint32_t uniform_index(uint32_t n) {
    uint32_t v = static_cast<uint32_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

  // Poisson sample by CDF inversion with a single uniform draw. Intended for
  // small means (photon numbers, mean below ~10); the iteration cap only
  // guards against a pathological parameter, not a real sampling path.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    double u = uniform();
    double pmf = std::exp(-mean);
    double cdf = pmf;
    int k = 0;
    while (u >= cdf && k < 4096) {
      ++k;
      pmf *= mean / static_cast<double>(k);
      cdf += pmf;
    }
    return k;
  }

  uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mpqkd

#endif  // MPQKD_RNG_HPP
