#pragma once

#include <cstdint>
#include <vector>

namespace spikeseq {

/* SplitMix64 (Steele/Lea/Flood constants). Chosen because the byte-level
 * sequence is pinned: every implementation of the pixel permutation must
 * produce the same order for the same seed. Also used wherever reports
 * must be reproducible across platforms; std::normal_distribution is not. */
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /* uniform in (0, 1] */
  double uniform() { return (double)((next() >> 11) + 1) * 0x1.0p-53; }

  /* uniform in [lo, hi) */
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (double)(next() >> 11) * 0x1.0p-53;
  }

  /* index in [0, n) without modulo bias (Lemire reduction) */
  uint64_t below(uint64_t n) {
    return (uint64_t)(((__uint128_t)next() * n) >> 64);
  }

  double normal();  // Box-Muller, deterministic

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/* Independent stream for a (seed, index) pair: hashes the pair through two
 * SplitMix64 scrambles so trial/case streams never overlap in practice. */
uint64_t stream_seed(uint64_t seed, uint64_t index);

/* In-place Fisher-Yates shuffle driven by the given generator, iterating
 * i = n-1 .. 1, j = rng.below(i+1). The exact loop order is part of the
 * permutation contract. */
template <class T>
void fisher_yates(std::vector<T>& v, SplitMix64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = (size_t)rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<int64_t> permutation(int64_t n, uint64_t seed);

}  // namespace spikeseq
