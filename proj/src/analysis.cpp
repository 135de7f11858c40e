#include "spikeseq/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "spikeseq/neurons.hpp"
#include "spikeseq/rng.hpp"

namespace spikeseq {

namespace {

RealSeq random_current(int64_t steps, int64_t batch, int64_t channels, double sigma,
                       SplitMix64& rng) {
  RealArray v({steps, batch, channels});
  for (int64_t i = 0; i < v.size(); ++i) v[i] = sigma * rng.normal();
  return RealSeq(v, SignalKind::current);
}

}  // namespace

std::vector<double> frequency_response_closed(double tau, double theta,
                                              const std::vector<double>& omegas) {
  std::vector<double> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    const double a = 1.0 / tau;
    const double b = w - theta;
    out.push_back(1.0 / std::sqrt(a * a + b * b));
  }
  return out;
}

std::vector<double> frequency_response_sim(const FreqSimConfig& cfg,
                                           const std::vector<double>& omegas) {
  if (cfg.steps < 8) throw std::invalid_argument("frequency_response_sim: too few steps");
  const int64_t steps = cfg.steps;
  const int64_t window = steps / 4;
  const int64_t start = steps - window;
  RealArray delta({1}, cfg.delta), tau({1}, cfg.tau), theta({1}, cfg.theta);

  std::vector<double> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    RealArray drive({steps, 1, 1});
    for (int64_t t = 0; t < steps; ++t) drive[t] = std::cos(w * cfg.delta * (double)t);
    PrfResult r = prf_sequential(RealSeq(drive, SignalKind::current), delta, tau, theta,
                                 /*v_th=*/1.0);
    std::complex<double> ap(0.0, 0.0), am(0.0, 0.0), eps(0.0, 0.0);
    for (int64_t t = start; t < steps; ++t) {
      const std::complex<double> u = r.potentials.values[t];
      const std::complex<double> rot = std::polar(1.0, -w * cfg.delta * (double)t);
      ap += u * rot;
      am += u * std::conj(rot);
      eps += rot * rot;
    }
    const double inv = 1.0 / (double)window;
    ap *= inv;
    am *= inv;
    eps *= inv;
    /* the real drive excites +w and -w; solve both lock-in equations:
     *   2*ap = H+ + eps*H-,  2*am = conj(eps)*H+ + H-  */
    const double det = 1.0 - std::norm(eps);
    std::complex<double> hp;
    if (std::abs(det) < 1e-9) {
      hp = 2.0 * ap / (1.0 + eps);  // degenerate only when H+ == H- (w ~ 0)
    } else {
      hp = 2.0 * (ap - eps * am) / det;
    }
    out.push_back(std::abs(hp));
  }
  return out;
}

MatchReport check_reset_as_threshold(int64_t cases, uint64_t seed) {
  MatchReport report;
  report.cases = cases;
  for (int64_t c = 0; c < cases; ++c) {
    SplitMix64 rng(stream_seed(seed, (uint64_t)c));
    const int64_t steps = 1 + (int64_t)rng.below(256);
    const int64_t batch = 1 + (int64_t)rng.below(4);
    const int64_t channels = 1 + (int64_t)rng.below(8);
    const double v_th = 1.0;
    RealArray beta({channels});
    for (int64_t i = 0; i < channels; ++i) beta[i] = rng.uniform(0.05, 0.95);
    RealSeq input = random_current(steps, batch, channels, 1.0, rng);

    LifResult lif = lif_sequential(input, beta, v_th);
    /* adaptation decay tied to the membrane decay; threshold jump v_th*beta */
    RealArray coupling({channels});
    for (int64_t i = 0; i < channels; ++i) coupling[i] = v_th * beta[i];
    AlifResult alif = alif_sequential(input, beta, v_th, beta, coupling);
    for (int64_t i = 0; i < lif.spikes.values.size(); ++i)
      if (lif.spikes.values[i] != alif.spikes.values[i]) ++report.spike_mismatches;
  }
  return report;
}

MatchReport check_oscillator_degenerates(int64_t cases, uint64_t seed) {
  MatchReport report;
  report.cases = cases;
  for (int64_t c = 0; c < cases; ++c) {
    SplitMix64 rng(stream_seed(seed, (uint64_t)c));
    const int64_t steps = 1 + (int64_t)rng.below(256);
    const int64_t batch = 1 + (int64_t)rng.below(4);
    const int64_t channels = 1 + (int64_t)rng.below(4);
    const double v_th = 1.0;
    RealArray tau({channels}), lambda({channels});
    for (int64_t i = 0; i < channels; ++i) {
      tau[i] = rng.uniform(1.1, 100.0);
      lambda[i] = std::exp(-1.0 / tau[i]);
    }
    RealArray delta({1}, 1.0), theta({1}, 0.0);
    RealSeq input = random_current(steps, batch, channels, 1.0, rng);

    PrfResult osc = prf_sequential(input, delta, tau, theta, v_th);
    RealArray zero({1}, 0.0);
    AlifResult acc = alif_sequential(input, lambda, v_th, zero, zero);
    for (int64_t i = 0; i < osc.potentials.values.size(); ++i) {
      const std::complex<double> u = osc.potentials.values[i];
      if (u.real() != acc.potentials.values[i] || u.imag() != 0.0) ++report.trace_mismatches;
      if (osc.spikes.values[i] != acc.spikes.values[i]) ++report.spike_mismatches;
    }
  }
  return report;
}

double variance_exact(double delta, double tau, double sigma, int64_t steps) {
  const double r = std::exp(-2.0 * delta / tau);
  const double horizon = 1.0 - std::exp(-2.0 * delta * (double)steps / tau);
  return delta * delta * sigma * sigma * horizon / (1.0 - r);
}

double variance_limit(double delta, double tau, double sigma) {
  return delta * delta * sigma * sigma / (1.0 - std::exp(-2.0 * delta / tau));
}

double variance_approx(double delta, double tau, double sigma) {
  return tau * delta * sigma * sigma / 2.0;
}

VarianceReport check_membrane_variance(double delta, double tau, double sigma, int64_t trials,
                                       int64_t steps, uint64_t seed) {
  if (!(tau > delta && delta > 0.0)) throw std::invalid_argument("variance: need tau > delta > 0");
  if (trials < 2) throw std::invalid_argument("variance: need at least 2 trials");
  if (steps <= 0) {
    steps = (int64_t)std::ceil(std::log(1000.0) * tau / (2.0 * delta));
    while (std::exp(-2.0 * delta * (double)steps / tau) >= 1e-3) ++steps;
  }
  const double lam = std::exp(-delta / tau);
  std::vector<double> finals((size_t)trials);
  for (int64_t trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(stream_seed(seed, (uint64_t)trial));
    double u = 0.0;
    for (int64_t t = 0; t < steps; ++t) u = lam * u + delta * sigma * rng.normal();
    finals[(size_t)trial] = u;
  }
  double mean = 0.0;
  for (double v : finals) mean += v;
  mean /= (double)trials;
  double var = 0.0;
  for (double v : finals) var += (v - mean) * (v - mean);
  var /= (double)(trials - 1);

  VarianceReport r;
  r.empirical = var;
  r.exact_value = variance_exact(delta, tau, sigma, steps);
  r.limit_value = variance_limit(delta, tau, sigma);
  r.approx_value = variance_approx(delta, tau, sigma);
  r.rel_se = std::sqrt(2.0 / (double)trials);
  r.trials = trials;
  r.steps = steps;
  return r;
}

double kernel_spike_alignment(const std::complex<double>* kernel, const double* spikes,
                              int64_t steps) {
  double acc = 0.0;
  for (int64_t t = 0; t < steps; ++t) acc += kernel[t].real() * spikes[steps - 1 - t];
  return acc;
}

double kernel_spike_alignment(const double* kernel, const double* spikes, int64_t steps) {
  double acc = 0.0;
  for (int64_t t = 0; t < steps; ++t) acc += kernel[t] * spikes[steps - 1 - t];
  return acc;
}

FiringRateReport firing_rate_stats(const std::vector<const RealArray*>& layers) {
  FiringRateReport r;
  int64_t total = 0, nonzero = 0;
  for (const RealArray* layer : layers) {
    int64_t nz = 0;
    for (int64_t i = 0; i < layer->size(); ++i)
      if ((*layer)[i] != 0.0) ++nz;
    r.per_layer.push_back(layer->size() ? (double)nz / (double)layer->size() : 0.0);
    total += layer->size();
    nonzero += nz;
  }
  r.overall = total ? (double)nonzero / (double)total : 0.0;
  return r;
}

}  // namespace spikeseq
