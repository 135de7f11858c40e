#include "spikeseq/rng.hpp"

#include <cmath>
#include <numeric>

namespace spikeseq {

double SplitMix64::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();  // (0, 1], so log is finite
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

uint64_t stream_seed(uint64_t seed, uint64_t index) {
  SplitMix64 h(seed ^ (0xA0761D6478BD642FULL * (index + 1)));
  h.next();
  return h.next();
}

std::vector<int64_t> permutation(int64_t n, uint64_t seed) {
  std::vector<int64_t> p((size_t)n);
  std::iota(p.begin(), p.end(), 0);
  SplitMix64 rng(seed);
  fisher_yates(p, rng);
  return p;
}

}  // namespace spikeseq
