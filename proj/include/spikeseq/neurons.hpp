#pragma once

#include "spikeseq/seqcore.hpp"

namespace spikeseq {

/* All neuron state starts at zero; a step fires when the membrane reaches
 * the threshold (ties fire). Per-channel parameter arrays have size 1
 * (shared) or `channels`; v_th is a scalar shared by every lane. */

struct LifResult {
  RealSeq spikes;      // 0/1
  RealSeq potentials;  // coupled membrane u_t (after-reset dynamics)
};

/* u_t = beta*(u_{t-1} - v_th*s_{t-1}) + c_t ; s_t = [u_t >= v_th] */
LifResult lif_sequential(const RealSeq& input, const RealArray& beta, double v_th);

/* Reset-free potentials u'_t -> per-step thresholds d_t:
 *   bias a starts at 0, d starts at v_th;
 *   emit d_t; if u'_t >= d_t the bias gains 1; a <- beta*a; d <- v_th*(a+1).
 * Fires in u' >= d exactly where the coupled dynamics fire. */
RealSeq decoupled_reset_scan(const RealSeq& uprime, const RealArray& beta, double v_th);

struct LifParallelResult {
  RealSeq spikes;
  RealSeq potentials;  // reset-free u'_t
  RealSeq thresholds;  // d_t
};

/* u' = input (*) geometric kernel via FFT; d = scan(u'); s = [u' >= d]. */
LifParallelResult lif_parallel(const RealSeq& input, const RealArray& beta, double v_th);

struct PrfResult {
  RealSeq spikes;
  ComplexSeq potentials;
};

/* u~_t = a*u~_{t-1} + delta*c_t with a = exp(delta*(-1/tau + i*theta));
 * s_t = [Re{u~_t} >= v_th]. No reset, so the parallel form needs no scan. */
PrfResult prf_sequential(const RealSeq& input, const RealArray& delta,
                         const RealArray& tau, const RealArray& theta, double v_th);

/* Same trajectory through the complex kernel + FFT convolution. */
PrfResult prf_parallel(const RealSeq& input, const RealArray& delta,
                       const RealArray& tau, const RealArray& theta, double v_th);

/* Deployment form: the complex multiply unrolled into two real states,
 *   u_t = phi_re*u - phi_im*r + delta*c ; r_t = phi_im*u + phi_re*r,
 * with phi_re = exp(-delta/tau)*cos(delta*theta), phi_im likewise with sin. */
struct DeployParams {
  RealArray phi_re, phi_im;  // (channels)
};
DeployParams prf_deploy_params(const RealArray& delta, const RealArray& tau,
                               const RealArray& theta);

struct DeployResult {
  RealSeq spikes;
  RealSeq re;  // u trace  (equals Re{u~})
  RealSeq im;  // r trace  (equals Im{u~})
};
DeployResult prf_deploy_run(const RealSeq& input, const DeployParams& phi,
                            const RealArray& delta, double v_th);

/* Stateless gate: s_t = alpha * [c_t >= v_th]. alpha is trainable elsewhere;
 * scaling spikes commutes with the next linear layer exactly because spikes
 * are binary. */
RealSeq spatial_forward(const RealSeq& input, const RealArray& alpha, double v_th);

struct AlifResult {
  RealSeq spikes;
  RealSeq potentials;  // reset-free membrane
};

/* Adaptive threshold, no reset:
 *   u_t = beta_lif*u_{t-1} + c_t
 *   z_t = [u_t >= v_th + coupling*a_t] ; a_{t+1} = rho*a_t + z_t, a_1 = 0.
 * With rho = beta_lif and coupling = v_th*beta_lif this reproduces the
 * soft-reset spike train exactly (the adaptation decay must equal the
 * membrane decay for the weighted spike history to match). */
AlifResult alif_sequential(const RealSeq& input, const RealArray& beta_lif,
                           double v_th, const RealArray& rho,
                           const RealArray& coupling);

}  // namespace spikeseq
