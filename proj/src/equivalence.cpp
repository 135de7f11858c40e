#include "spikeseq/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

#include "spikeseq/neurons.hpp"
#include "spikeseq/rng.hpp"
#include "spikeseq/seqcore.hpp"

namespace spikeseq {

namespace {

struct CaseShape {
  int64_t steps, batch, channels;
};

CaseShape draw_shape(SplitMix64& rng, const EquivConfig& cfg) {
  return {1 + (int64_t)rng.below((uint64_t)cfg.max_steps),
          1 + (int64_t)rng.below((uint64_t)cfg.max_batch),
          1 + (int64_t)rng.below((uint64_t)cfg.max_channels)};
}

RealSeq draw_input(SplitMix64& rng, const CaseShape& s) {
  RealArray v({s.steps, s.batch, s.channels});
  for (int64_t i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return RealSeq(v, SignalKind::current);
}

void note_failure(EquivReport& rep, const char* kind, int64_t case_idx, int64_t spikes,
                  double rel_err) {
  ++rep.failed_cases;
  if (rep.failures.size() >= 32) return;
  char line[160];
  std::snprintf(line, sizeof line, "%s case %lld: %lld spike mismatches, rel err %.3e", kind,
                (long long)case_idx, (long long)spikes, rel_err);
  rep.failures.emplace_back(line);
}

/* membrane agreement metric: peak |a-b| over max(1, peak |a|) */
double rel_err_real(const RealArray& a, const RealArray& b) {
  double peak = 1.0, diff = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    peak = std::max(peak, std::abs(a[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / peak;
}

double rel_err_complex(const ComplexArray& a, const ComplexArray& b) {
  double peak = 1.0, diff = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    peak = std::max(peak, std::abs(a[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / peak;
}

int64_t count_spike_mismatch(const RealArray& a, const RealArray& b) {
  int64_t n = 0;
  for (int64_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) ++n;
  return n;
}

void run_leaky_case(const EquivConfig& cfg, int64_t case_idx, EquivReport& rep) {
  SplitMix64 rng(stream_seed(cfg.seed, (uint64_t)(2 * case_idx)));
  const CaseShape s = draw_shape(rng, cfg);
  RealArray beta({s.channels});
  for (int64_t i = 0; i < s.channels; ++i) beta[i] = rng.uniform(cfg.beta_min, cfg.beta_max);
  RealSeq input = draw_input(rng, s);

  LifResult seq = lif_sequential(input, beta, cfg.v_th);

  DecayKernel<double> kernel = build_lif_kernel(beta, s.steps);
  if (cfg.inject_kernel_bug) {
    for (int64_t n = 0; n < s.channels; ++n)
      for (int64_t t = 0; t < s.steps; ++t) kernel.rows[n * s.steps + t] *= beta[n];
  }
  RealSeq uprime = causal_convolve(input, kernel);
  RealSeq d = decoupled_reset_scan(uprime, beta, cfg.v_th);
  RealArray spikes_par({s.steps, s.batch, s.channels});
  for (int64_t i = 0; i < spikes_par.size(); ++i)
    spikes_par[i] = uprime.values[i] >= d.values[i] ? 1.0 : 0.0;

  /* the reset-free trace minus the accumulated reset bias recovers the
   * coupled membrane: u = u' - (d - v_th) */
  RealArray u_rec({s.steps, s.batch, s.channels});
  for (int64_t i = 0; i < u_rec.size(); ++i)
    u_rec[i] = uprime.values[i] - (d.values[i] - cfg.v_th);

  const int64_t sm = count_spike_mismatch(seq.spikes.values, spikes_par);
  const double err = rel_err_real(seq.potentials.values, u_rec);
  rep.spike_mismatches += sm;
  rep.max_rel_err_leaky = std::max(rep.max_rel_err_leaky, err);
  ++rep.cases_run;
  if (sm != 0 || err > cfg.tolerance) note_failure(rep, "leaky", case_idx, sm, err);
}

void run_resonate_case(const EquivConfig& cfg, int64_t case_idx, EquivReport& rep) {
  SplitMix64 rng(stream_seed(cfg.seed, (uint64_t)(2 * case_idx + 1)));
  const CaseShape s = draw_shape(rng, cfg);
  RealArray delta({s.channels}), tau({s.channels}), theta({s.channels});
  for (int64_t i = 0; i < s.channels; ++i) {
    delta[i] = std::exp(rng.uniform(cfg.delta_log_min, cfg.delta_log_max));
    tau[i] = delta[i] * rng.uniform(cfg.tau_ratio_min, cfg.tau_ratio_max);
    theta[i] = rng.uniform(0.0, cfg.theta_max);
  }
  RealSeq input = draw_input(rng, s);

  PrfResult seq = prf_sequential(input, delta, tau, theta, cfg.v_th);

  PrfResult par;
  if (cfg.inject_kernel_bug) {
    DecayKernel<std::complex<double>> kernel = build_prf_kernel(delta, tau, theta, s.steps);
    for (int64_t n = 0; n < s.channels; ++n) {
      const std::complex<double> a =
          std::exp(std::complex<double>(-delta[n] / tau[n], delta[n] * theta[n]));
      for (int64_t t = 0; t < s.steps; ++t) kernel.rows[n * s.steps + t] *= a;
    }
    ComplexSeq pots = causal_convolve(input, kernel);
    RealArray spikes({s.steps, s.batch, s.channels});
    for (int64_t i = 0; i < spikes.size(); ++i)
      spikes[i] = pots.values[i].real() >= cfg.v_th ? 1.0 : 0.0;
    par = PrfResult{RealSeq(spikes, SignalKind::spike), pots};
  } else {
    par = prf_parallel(input, delta, tau, theta, cfg.v_th);
  }

  DeployResult dep = prf_deploy_run(input, prf_deploy_params(delta, tau, theta), delta, cfg.v_th);

  int64_t sm = count_spike_mismatch(seq.spikes.values, par.spikes.values);
  sm += count_spike_mismatch(seq.spikes.values, dep.spikes.values);
  double err = rel_err_complex(seq.potentials.values, par.potentials.values);
  {
    /* deploy traces are the complex membrane split into two real states */
    double peak = 1.0, diff = 0.0;
    for (int64_t i = 0; i < seq.potentials.values.size(); ++i) {
      const std::complex<double> u = seq.potentials.values[i];
      const std::complex<double> v(dep.re.values[i], dep.im.values[i]);
      peak = std::max(peak, std::abs(u));
      diff = std::max(diff, std::abs(u - v));
    }
    err = std::max(err, diff / peak);
  }
  rep.spike_mismatches += sm;
  rep.max_rel_err_resonate = std::max(rep.max_rel_err_resonate, err);
  ++rep.cases_run;
  if (sm != 0 || err > cfg.tolerance) note_failure(rep, "resonate", case_idx, sm, err);
}

}  // namespace

EquivReport run_equivalence_suite(const EquivConfig& cfg) {
  EquivReport rep;
  for (int64_t i = 0; i < cfg.cases; ++i) {
    if (cfg.leaky) run_leaky_case(cfg, i, rep);
    if (cfg.resonate) run_resonate_case(cfg, i, rep);
  }
  return rep;
}

}  // namespace spikeseq
