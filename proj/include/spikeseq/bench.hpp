#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spikeseq {

struct BenchRecord {
  int64_t seq_len = 0;
  int64_t batch = 0;
  int64_t channels = 0;
  std::string mode;   // "sequential" | "parallel"
  std::string phase;  // "forward" | "backward" | "total"
  double ms = 0.0;    // median over repeats
  int64_t repeats = 0;
};

struct BenchConfig {
  std::vector<int64_t> seq_lens{256, 1024, 4096};
  int64_t batch = 64;
  int64_t channels = 128;
  int64_t repeats = 3;  // plus one warmup run per mode
  uint64_t seed = 1;
  double beta = 0.9;
  double v_th = 1.0;
};

/* Times one training step of the leaky layer (forward + backward through a
 * weighted-sum loss) on identical inputs, twice: once as the per-step
 * unrolled graph, once as the fused convolution + threshold-scan route.
 * Medians of a monotonic clock; both routes share dtype, layout and
 * allocator so only the algorithm differs. */
std::vector<BenchRecord> run_bench(const BenchConfig& cfg);

/* speedup(L) = sequential_total / parallel_total from the records */
std::vector<std::pair<int64_t, double>> bench_speedups(const std::vector<BenchRecord>& records);

}  // namespace spikeseq
