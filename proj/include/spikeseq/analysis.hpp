#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "spikeseq/array.hpp"

namespace spikeseq {

/* Continuous-time gain of the damped oscillator at drive frequency omega:
 * 1 / sqrt((1/tau)^2 + (omega - theta)^2). Peaks at omega = theta with
 * height tau. */
std::vector<double> frequency_response_closed(double tau, double theta,
                                              const std::vector<double>& omegas);

struct FreqSimConfig {
  double tau = 2.0;
  double theta = 0.5;
  double delta = 0.1;
  int64_t steps = 4096;  // measurement window is the last quarter
};

/* Drives the discrete oscillator with a unit real cosine and extracts the
 * complex response amplitude by two-sided lock-in over the tail window: a
 * real drive excites both +omega and -omega, so both demodulations are
 * taken and the 2x2 system solved for the positive-frequency amplitude. */
std::vector<double> frequency_response_sim(const FreqSimConfig& cfg,
                                           const std::vector<double>& omegas);

struct MatchReport {
  int64_t cases = 0;
  int64_t spike_mismatches = 0;
  int64_t trace_mismatches = 0;  // bitwise membrane disagreements
  bool passed() const { return spike_mismatches == 0 && trace_mismatches == 0; }
};

/* Soft-reset dynamics vs the reset-free adaptive-threshold form with the
 * adaptation decay tied to the membrane decay. Spike trains must agree
 * exactly on every random case. */
MatchReport check_reset_as_threshold(int64_t cases, uint64_t seed);

/* Oscillator at theta=0, step 1 vs a plain no-reset accumulator with decay
 * exp(-1/tau): real parts and spikes must agree bitwise. */
MatchReport check_oscillator_degenerates(int64_t cases, uint64_t seed);

struct VarianceReport {
  double empirical = 0.0;     // sample variance of the final membrane
  double exact_value = 0.0;   // closed form at the simulated horizon
  double limit_value = 0.0;   // closed form as the horizon grows
  double approx_value = 0.0;  // small-step approximation tau*delta*sigma^2/2
  double rel_se = 0.0;        // relative standard error of the estimate
  int64_t trials = 0;
  int64_t steps = 0;
};

/* Monte Carlo check of the stationary membrane variance under white input
 * of strength sigma, oscillation off. steps <= 0 picks the first horizon
 * where the transient term drops below 1e-3. Trials draw from independent
 * streams, so the estimate is identical regardless of evaluation order. */
VarianceReport check_membrane_variance(double delta, double tau, double sigma, int64_t trials,
                                       int64_t steps, uint64_t seed);

double variance_exact(double delta, double tau, double sigma, int64_t steps);
double variance_limit(double delta, double tau, double sigma);
double variance_approx(double delta, double tau, double sigma);

/* Alignment between a decay kernel row and a spike train: the real part of
 * the inner product with the time-reversed train. Distinguishes spike
 * placements that a plain sum would conflate. */
double kernel_spike_alignment(const std::complex<double>* kernel, const double* spikes,
                              int64_t steps);
double kernel_spike_alignment(const double* kernel, const double* spikes, int64_t steps);

struct FiringRateReport {
  std::vector<double> per_layer;  // fraction of nonzero entries
  double overall = 0.0;           // element-weighted
};

FiringRateReport firing_rate_stats(const std::vector<const RealArray*>& layers);

}  // namespace spikeseq
