#include "spikeseq/neurons.hpp"

#include <cmath>

namespace spikeseq {

namespace {

/* Per-channel parameter lookup, broadcasting size-1 arrays. */
struct ChannelParam {
  const RealArray& a;
  explicit ChannelParam(const RealArray& arr, int64_t channels, const char* what)
      : a(arr) {
    if (arr.size() != 1 && arr.size() != channels)
      throw std::invalid_argument(std::string(what) +
                                  ": size must be 1 or the channel count");
  }
  double operator[](int64_t n) const { return a.size() == 1 ? a[0] : a[n]; }
};

void check_input(const RealSeq& input) {
  if (input.steps() < 1) throw std::invalid_argument("input needs at least one step");
}

}  // namespace

LifResult lif_sequential(const RealSeq& input, const RealArray& beta, double v_th) {
  check_input(input);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  ChannelParam bt(beta, n, "beta");
  for (int64_t i = 0; i < beta.size(); ++i)
    if (!(beta[i] > 0.0 && beta[i] < 1.0))
      throw std::invalid_argument("lif_sequential: beta must be in (0, 1)");

  RealArray spikes({t, b, n});
  RealArray pots({t, b, n});
  const int64_t lanes = b * n;
  std::vector<double> u((size_t)lanes, 0.0), s((size_t)lanes, 0.0);
  const double* c = input.values.ptr();
  for (int64_t ti = 0; ti < t; ++ti) {
    double* sp = spikes.ptr() + ti * lanes;
    double* up = pots.ptr() + ti * lanes;
    const double* cp = c + ti * lanes;
    for (int64_t l = 0; l < lanes; ++l) {
      const double bl = bt[l % n];
      double un = bl * (u[(size_t)l] - v_th * s[(size_t)l]) + cp[l];
      double sn = un >= v_th ? 1.0 : 0.0;
      u[(size_t)l] = un;
      s[(size_t)l] = sn;
      up[l] = un;
      sp[l] = sn;
    }
  }
  return {RealSeq(spikes, SignalKind::spike), RealSeq(pots, SignalKind::potential)};
}

RealSeq decoupled_reset_scan(const RealSeq& uprime, const RealArray& beta, double v_th) {
  check_input(uprime);
  const int64_t t = uprime.steps(), b = uprime.batch(), n = uprime.channels();
  ChannelParam bt(beta, n, "beta");
  RealArray thr({t, b, n});
  const int64_t lanes = b * n;
  std::vector<double> bias((size_t)lanes, 0.0), d((size_t)lanes, v_th);
  const double* u = uprime.values.ptr();
  for (int64_t ti = 0; ti < t; ++ti) {
    double* dp = thr.ptr() + ti * lanes;
    const double* up = u + ti * lanes;
    for (int64_t l = 0; l < lanes; ++l) {
      dp[l] = d[(size_t)l];
      double a = bias[(size_t)l];
      if (up[l] >= d[(size_t)l]) a += 1.0;
      a *= bt[l % n];
      bias[(size_t)l] = a;
      d[(size_t)l] = v_th * a + v_th;
    }
  }
  return RealSeq(thr, SignalKind::potential);
}

LifParallelResult lif_parallel(const RealSeq& input, const RealArray& beta, double v_th) {
  check_input(input);
  DecayKernel<double> kernel = build_lif_kernel(beta, input.steps());
  RealSeq uprime = causal_convolve(input, kernel);
  RealSeq thr = decoupled_reset_scan(uprime, beta, v_th);
  RealArray spikes(uprime.values.shape);
  const double* u = uprime.values.ptr();
  const double* d = thr.values.ptr();
  double* s = spikes.ptr();
  const int64_t total = uprime.values.size();
  for (int64_t i = 0; i < total; ++i) s[i] = u[i] >= d[i] ? 1.0 : 0.0;
  return {RealSeq(spikes, SignalKind::spike), uprime, thr};
}

PrfResult prf_sequential(const RealSeq& input, const RealArray& delta,
                         const RealArray& tau, const RealArray& theta, double v_th) {
  check_input(input);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  ChannelParam dl(delta, n, "delta"), tc(tau, n, "tau"), th(theta, n, "theta");
  std::vector<std::complex<double>> a((size_t)n);
  std::vector<double> dv((size_t)n);
  for (int64_t i = 0; i < n; ++i) {
    double d = dl[i], tcv = tc[i];
    if (!(d > 0.0 && tcv > d))
      throw std::invalid_argument("prf_sequential: requires tau > delta > 0");
    a[(size_t)i] = std::exp(std::complex<double>(-d / tcv, d * th[i]));
    dv[(size_t)i] = d;
  }

  RealArray spikes({t, b, n});
  ComplexArray pots({t, b, n});
  const int64_t lanes = b * n;
  std::vector<std::complex<double>> u((size_t)lanes, {0.0, 0.0});
  const double* c = input.values.ptr();
  for (int64_t ti = 0; ti < t; ++ti) {
    std::complex<double>* up = pots.ptr() + ti * lanes;
    double* sp = spikes.ptr() + ti * lanes;
    const double* cp = c + ti * lanes;
    for (int64_t l = 0; l < lanes; ++l) {
      const int64_t ch = l % n;
      std::complex<double> un = a[(size_t)ch] * u[(size_t)l] + dv[(size_t)ch] * cp[l];
      u[(size_t)l] = un;
      up[l] = un;
      sp[l] = un.real() >= v_th ? 1.0 : 0.0;
    }
  }
  return {RealSeq(spikes, SignalKind::spike), ComplexSeq(pots, SignalKind::potential)};
}

PrfResult prf_parallel(const RealSeq& input, const RealArray& delta,
                       const RealArray& tau, const RealArray& theta, double v_th) {
  check_input(input);
  DecayKernel<std::complex<double>> kernel =
      build_prf_kernel(delta, tau, theta, input.steps());
  ComplexSeq pots = causal_convolve(input, kernel);
  RealArray spikes(pots.values.shape);
  const std::complex<double>* u = pots.values.ptr();
  double* s = spikes.ptr();
  const int64_t total = pots.values.size();
  for (int64_t i = 0; i < total; ++i) s[i] = u[i].real() >= v_th ? 1.0 : 0.0;
  return {RealSeq(spikes, SignalKind::spike), pots};
}

DeployParams prf_deploy_params(const RealArray& delta, const RealArray& tau,
                               const RealArray& theta) {
  int64_t n = std::max({delta.size(), tau.size(), theta.size()});
  ChannelParam dl(delta, n, "delta"), tc(tau, n, "tau"), th(theta, n, "theta");
  DeployParams p{RealArray({n}), RealArray({n})};
  for (int64_t i = 0; i < n; ++i) {
    double d = dl[i], tcv = tc[i];
    if (!(d > 0.0 && tcv > d))
      throw std::invalid_argument("prf_deploy_params: requires tau > delta > 0");
    double mag = std::exp(-d / tcv);
    p.phi_re[i] = mag * std::cos(d * th[i]);
    p.phi_im[i] = mag * std::sin(d * th[i]);
  }
  return p;
}

DeployResult prf_deploy_run(const RealSeq& input, const DeployParams& phi,
                            const RealArray& delta, double v_th) {
  check_input(input);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  ChannelParam pre(phi.phi_re, n, "phi_re"), pim(phi.phi_im, n, "phi_im");
  ChannelParam dl(delta, n, "delta");

  RealArray spikes({t, b, n}), reTr({t, b, n}), imTr({t, b, n});
  const int64_t lanes = b * n;
  std::vector<double> u((size_t)lanes, 0.0), r((size_t)lanes, 0.0);
  const double* c = input.values.ptr();
  for (int64_t ti = 0; ti < t; ++ti) {
    const double* cp = c + ti * lanes;
    double* sp = spikes.ptr() + ti * lanes;
    double* rp = reTr.ptr() + ti * lanes;
    double* ip = imTr.ptr() + ti * lanes;
    for (int64_t l = 0; l < lanes; ++l) {
      const int64_t ch = l % n;
      double un = pre[ch] * u[(size_t)l] - pim[ch] * r[(size_t)l] + dl[ch] * cp[l];
      double rn = pim[ch] * u[(size_t)l] + pre[ch] * r[(size_t)l];
      u[(size_t)l] = un;
      r[(size_t)l] = rn;
      rp[l] = un;
      ip[l] = rn;
      sp[l] = un >= v_th ? 1.0 : 0.0;
    }
  }
  return {RealSeq(spikes, SignalKind::spike), RealSeq(reTr, SignalKind::potential),
          RealSeq(imTr, SignalKind::potential)};
}

RealSeq spatial_forward(const RealSeq& input, const RealArray& alpha, double v_th) {
  check_input(input);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  ChannelParam al(alpha, n, "alpha");
  RealArray spikes({t, b, n});
  const double* c = input.values.ptr();
  double* s = spikes.ptr();
  const int64_t lanes = b * n;
  for (int64_t ti = 0; ti < t; ++ti)
    for (int64_t l = 0; l < lanes; ++l) {
      const int64_t i = ti * lanes + l;
      s[i] = c[i] >= v_th ? al[l % n] : 0.0;
    }
  return RealSeq(spikes, SignalKind::spike);
}

AlifResult alif_sequential(const RealSeq& input, const RealArray& beta_lif,
                           double v_th, const RealArray& rho,
                           const RealArray& coupling) {
  check_input(input);
  const int64_t t = input.steps(), b = input.batch(), n = input.channels();
  ChannelParam bt(beta_lif, n, "beta_lif");
  ChannelParam rh(rho, n, "rho");
  ChannelParam cg(coupling, n, "coupling");
  RealArray spikes({t, b, n}), pots({t, b, n});
  const int64_t lanes = b * n;
  std::vector<double> u((size_t)lanes, 0.0), ad((size_t)lanes, 0.0);
  const double* c = input.values.ptr();
  for (int64_t ti = 0; ti < t; ++ti) {
    const double* cp = c + ti * lanes;
    double* sp = spikes.ptr() + ti * lanes;
    double* up = pots.ptr() + ti * lanes;
    for (int64_t l = 0; l < lanes; ++l) {
      double un = bt[l % n] * u[(size_t)l] + cp[l];
      double z = un >= v_th + cg[l % n] * ad[(size_t)l] ? 1.0 : 0.0;
      ad[(size_t)l] = rh[l % n] * ad[(size_t)l] + z;
      u[(size_t)l] = un;
      up[l] = un;
      sp[l] = z;
    }
  }
  return {RealSeq(spikes, SignalKind::spike), RealSeq(pots, SignalKind::potential)};
}

}  // namespace spikeseq
