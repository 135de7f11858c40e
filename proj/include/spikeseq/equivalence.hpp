#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeseq/array.hpp"

namespace spikeseq {

struct EquivConfig {
  int64_t cases = 1000;
  uint64_t seed = 2024;
  bool leaky = true;      // sequential vs FFT+scan route
  bool resonate = true;   // sequential vs FFT route vs two-real-state deploy form
  int64_t max_steps = 512;
  int64_t max_batch = 8;
  int64_t max_channels = 32;
  double beta_min = 0.05, beta_max = 0.95;
  double delta_log_min = -6.9077552789821368;  // ln(1e-3)
  double delta_log_max = 0.0;                  // ln(1)
  double tau_ratio_min = 1.1, tau_ratio_max = 100.0;
  double theta_max = 3.141592653589793238462643383279502884;
  double v_th = 1.0;
  double tolerance = 1e-9;  // relative, denominator max(1, peak |membrane|)
  bool inject_kernel_bug = false;  // negative control: shifts kernels one decay power
};

struct EquivReport {
  int64_t cases_run = 0;
  int64_t failed_cases = 0;
  int64_t spike_mismatches = 0;
  double max_rel_err_leaky = 0.0;
  double max_rel_err_resonate = 0.0;
  std::vector<std::string> failures;  // one line per failed case, capped at 32

  bool passed() const { return failed_cases == 0; }
};

/* Random-configuration agreement suite: spike trains must match exactly and
 * membrane traces within the relative tolerance. Each case draws from its
 * own stream, so any subset of case indices reproduces independently. */
EquivReport run_equivalence_suite(const EquivConfig& cfg);

}  // namespace spikeseq
