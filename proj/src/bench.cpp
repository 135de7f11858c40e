#include "spikeseq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <map>
#include <stdexcept>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "spikeseq/rng.hpp"
#include "spikeseq/traingrad.hpp"

namespace spikeseq {

namespace {

using Clock = std::chrono::steady_clock;
using traingrad::Tape;
using traingrad::Tensor;
using traingrad::Var;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct StepTimes {
  double fwd, bwd;
};

StepTimes one_step(const Tensor& input, const Tensor& loss_w, const BenchConfig& cfg,
                   bool parallel) {
  Tape tape;
  /* Timing harness: tuned transform plans are fair game here because only
   * wall times leave this function, never tensor values. */
  tape.set_plan_effort(fft::PlanEffort::tuned);
  Var x = tape.leaf(input, true);
  const auto t0 = Clock::now();
  Var spikes = parallel ? tape.lif_layer(x, cfg.beta, cfg.v_th)
                        : tape.lif_layer_stepwise(x, cfg.beta, cfg.v_th);
  Var loss = tape.weighted_sum(spikes, loss_w);
  const auto t1 = Clock::now();
  tape.backward(loss);
  const auto t2 = Clock::now();
  return {ms_between(t0, t1), ms_between(t1, t2)};
}

/* Harness-level allocator tuning, applied identically to both modes: these
 * runs allocate and free the same multi-hundred-MB tensors every step, and
 * glibc's default thresholds hand such blocks straight back to the kernel,
 * so every step would re-fault its pages in and timing would measure the
 * kernel's page allocator more than the code under test. Raising the mmap
 * threshold keeps big tensors in the arena, and disabling top-chunk trim
 * keeps that arena mapped between steps (a freed 268 MB tensor at the
 * longest length otherwise gets returned and re-faulted every step). */
void tune_allocator_for_timing() {
#ifdef __GLIBC__
  static bool done = false;
  if (done) return;
  done = true;
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, INT_MAX);
#endif
}

}  // namespace

std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  if (cfg.repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
  tune_allocator_for_timing();
  std::vector<BenchRecord> records;
  for (int64_t len : cfg.seq_lens) {
    SplitMix64 rng(stream_seed(cfg.seed, (uint64_t)len));
    Tensor input({len, cfg.batch, cfg.channels});
    for (int64_t i = 0; i < input.size(); ++i) input[i] = rng.normal();
    Tensor loss_w(input.shape);
    for (int64_t i = 0; i < loss_w.size(); ++i) loss_w[i] = rng.uniform(-1.0, 1.0);

    for (bool parallel : {false, true}) {
      one_step(input, loss_w, cfg, parallel);  // warmup: plans, allocator, caches
      std::vector<double> fwd, bwd, total;
      for (int64_t r = 0; r < cfg.repeats; ++r) {
        const StepTimes t = one_step(input, loss_w, cfg, parallel);
        fwd.push_back(t.fwd);
        bwd.push_back(t.bwd);
        total.push_back(t.fwd + t.bwd);
      }
      const std::string mode = parallel ? "parallel" : "sequential";
      records.push_back({len, cfg.batch, cfg.channels, mode, "forward", median(fwd), cfg.repeats});
      records.push_back({len, cfg.batch, cfg.channels, mode, "backward", median(bwd), cfg.repeats});
      records.push_back({len, cfg.batch, cfg.channels, mode, "total", median(total), cfg.repeats});
    }
  }
  return records;
}

std::vector<std::pair<int64_t, double>> bench_speedups(const std::vector<BenchRecord>& records) {
  std::map<int64_t, std::pair<double, double>> totals;  // len -> (sequential, parallel)
  for (const BenchRecord& r : records) {
    if (r.phase != "total") continue;
    if (r.mode == "sequential") totals[r.seq_len].first = r.ms;
    if (r.mode == "parallel") totals[r.seq_len].second = r.ms;
  }
  std::vector<std::pair<int64_t, double>> out;
  for (const auto& [len, pair] : totals) {
    if (pair.first <= 0.0 || pair.second <= 0.0)
      throw std::logic_error("bench_speedups: incomplete records");
    out.emplace_back(len, pair.first / pair.second);
  }
  return out;
}

}  // namespace spikeseq
