#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "spikeseq/fft.hpp"
#include "spikeseq/rng.hpp"
#include "spikeseq/seqcore.hpp"

using namespace spikeseq;
using cplx = std::complex<double>;

namespace {

RealSeq seq_from(const std::vector<double>& lane) {
  RealArray v({(int64_t)lane.size(), 1, 1});
  for (size_t i = 0; i < lane.size(); ++i) v[(int64_t)i] = lane[i];
  return RealSeq(std::move(v), SignalKind::current);
}

RealArray scalar_param(double x) {
  RealArray a({1});
  a[0] = x;
  return a;
}

}  // namespace

TEST_CASE("pad length covers linear convolution at a power of two") {
  CHECK(fft::pad_length(1) == 1);
  CHECK(fft::pad_length(2) == 4);
  CHECK(fft::pad_length(3) == 8);
  CHECK(fft::pad_length(512) == 1024);
  CHECK(fft::pad_length(513) == 2048);
  for (int64_t t = 1; t <= 300; ++t) {
    const int64_t p = fft::pad_length(t);
    CHECK(p >= 2 * t - 1);
    CHECK((p & (p - 1)) == 0);
  }
}

TEST_CASE("geometric kernel rows hold exact running-product powers") {
  DecayKernel<double> k = build_lif_kernel(scalar_param(0.5), 3);
  REQUIRE(k.channels() == 1);
  REQUIRE(k.steps() == 3);
  CHECK(k.rows[0] == 1.0);
  CHECK(k.rows[1] == 0.5);
  CHECK(k.rows[2] == 0.25);

  DecayKernel<double> k9 = build_lif_kernel(scalar_param(0.9), 5);
  double run = 1.0;
  for (int64_t t = 0; t < 5; ++t) {
    CHECK(k9.rows[t] == run);  // bitwise: running product, not pow()
    run *= 0.9;
  }

  RealArray betas({2});
  betas[0] = 0.25;
  betas[1] = 0.75;
  DecayKernel<double> k2 = build_lif_kernel(betas, 4);
  CHECK(k2.rows[1 * 4 + 3] == doctest::Approx(0.75 * 0.75 * 0.75));

  CHECK_THROWS(build_lif_kernel(scalar_param(0.0), 3));
  CHECK_THROWS(build_lif_kernel(scalar_param(1.0), 3));
  CHECK_THROWS(build_lif_kernel(scalar_param(-0.1), 3));
}

TEST_CASE("oscillator kernel rows match the complex exponential") {
  SUBCASE("no oscillation: real decaying row") {
    DecayKernel<cplx> k =
        build_prf_kernel(scalar_param(1.0), scalar_param(2.0), scalar_param(0.0), 3);
    CHECK(k.rows[0].real() == doctest::Approx(1.0));
    CHECK(k.rows[1].real() == doctest::Approx(std::exp(-0.5)));
    CHECK(k.rows[2].real() == doctest::Approx(std::exp(-1.0)));
    CHECK(k.rows[1].imag() == doctest::Approx(0.0));
  }
  SUBCASE("quarter-turn per step") {
    DecayKernel<cplx> k =
        build_prf_kernel(scalar_param(1.0), scalar_param(2.0), scalar_param(M_PI / 2), 3);
    CHECK(k.rows[0] == cplx(1.0, 0.0));
    CHECK(k.rows[1].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(k.rows[1].imag() == doctest::Approx(std::exp(-0.5)));
    CHECK(k.rows[2].real() == doctest::Approx(-std::exp(-1.0)));
    CHECK(k.rows[2].imag() == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("magnitude decays geometrically, angle advances linearly") {
    DecayKernel<cplx> k =
        build_prf_kernel(scalar_param(0.3), scalar_param(1.7), scalar_param(0.9), 64);
    const double ratio = std::exp(-0.3 / 1.7);
    for (int64_t t = 0; t + 1 < 64; ++t)
      CHECK(std::abs(k.rows[t + 1]) / std::abs(k.rows[t]) == doctest::Approx(ratio));
    CHECK(std::arg(k.rows[1] / k.rows[0]) == doctest::Approx(0.3 * 0.9));
  }
  SUBCASE("invalid time constant is rejected") {
    CHECK_THROWS(build_prf_kernel(scalar_param(1.0), scalar_param(1.0), scalar_param(0.0), 3));
    CHECK_THROWS(build_prf_kernel(scalar_param(-1.0), scalar_param(2.0), scalar_param(0.0), 3));
  }
}

TEST_CASE("causal convolution worked examples") {
  DecayKernel<double> k = build_lif_kernel(scalar_param(0.5), 3);

  RealSeq y1 = causal_convolve(seq_from({2, 0, 0}), k);
  CHECK(y1.values[0] == doctest::Approx(2.0));
  CHECK(y1.values[1] == doctest::Approx(1.0));
  CHECK(y1.values[2] == doctest::Approx(0.5));
  CHECK(y1.kind == SignalKind::potential);

  RealSeq y2 = causal_convolve(seq_from({1, 1, 1}), k);
  CHECK(y2.values[0] == doctest::Approx(1.0));
  CHECK(y2.values[1] == doctest::Approx(1.5));
  CHECK(y2.values[2] == doctest::Approx(1.75));
}

TEST_CASE("unit impulse reproduces the kernel") {
  const int64_t T = 17;
  RealArray betas({1});
  betas[0] = 0.83;
  DecayKernel<double> k = build_lif_kernel(betas, T);
  std::vector<double> lane(T, 0.0);
  lane[0] = 1.0;
  RealSeq y = causal_convolve(seq_from(lane), k);
  for (int64_t t = 0; t < T; ++t)
    CHECK(y.values[t] == doctest::Approx(k.rows[t]).epsilon(1e-12));

  DecayKernel<cplx> kp =
      build_prf_kernel(scalar_param(0.4), scalar_param(2.2), scalar_param(1.1), T);
  ComplexSeq yp = causal_convolve(seq_from(lane), kp);
  for (int64_t t = 0; t < T; ++t) {
    CHECK(yp.values[t].real() == doctest::Approx(kp.rows[t].real()).epsilon(1e-12));
    CHECK(yp.values[t].imag() == doctest::Approx(kp.rows[t].imag()).epsilon(1e-12));
  }
}

TEST_CASE("fft route agrees with the direct sum on random batches") {
  SplitMix64 rng(11);
  for (int round = 0; round < 8; ++round) {
    const int64_t T = 1 + (int64_t)rng.below(512);
    const int64_t B = 1 + (int64_t)rng.below(3);
    const int64_t N = 1 + (int64_t)rng.below(5);
    RealArray in({T, B, N});
    for (int64_t i = 0; i < in.size(); ++i) in[i] = rng.normal();
    RealSeq input(in, SignalKind::current);

    const bool shared = rng.below(2) == 0;
    RealArray betas({shared ? 1 : N});
    for (int64_t i = 0; i < betas.size(); ++i) betas[i] = rng.uniform(0.05, 0.95);
    DecayKernel<double> k = build_lif_kernel(betas, T);

    RealSeq fast = causal_convolve(input, k);
    RealSeq slow = naive_convolve(input, k);
    double peak = 0.0, err = 0.0;
    for (int64_t i = 0; i < fast.values.size(); ++i) {
      peak = std::max(peak, std::abs(slow.values[i]));
      err = std::max(err, std::abs(fast.values[i] - slow.values[i]));
    }
    CHECK(err <= 1e-9 * std::max(1.0, peak));
  }
}

TEST_CASE("complex fft route agrees with the direct sum") {
  SplitMix64 rng(12);
  for (int round = 0; round < 6; ++round) {
    const int64_t T = 1 + (int64_t)rng.below(256);
    const int64_t N = 1 + (int64_t)rng.below(4);
    RealArray in({T, 2, N});
    for (int64_t i = 0; i < in.size(); ++i) in[i] = rng.normal();
    RealSeq input(in, SignalKind::current);

    RealArray d({N}), tau({N}), th({N});
    for (int64_t i = 0; i < N; ++i) {
      d[i] = rng.uniform(0.05, 1.0);
      tau[i] = d[i] * rng.uniform(1.2, 50.0);
      th[i] = rng.uniform(0.0, M_PI);
    }
    DecayKernel<cplx> k = build_prf_kernel(d, tau, th, T);

    ComplexSeq fast = causal_convolve(input, k);
    ComplexSeq slow = naive_convolve(input, k);
    double peak = 0.0, err = 0.0;
    for (int64_t i = 0; i < fast.values.size(); ++i) {
      peak = std::max(peak, std::abs(slow.values[i]));
      err = std::max(err, std::abs(fast.values[i] - slow.values[i]));
    }
    CHECK(err <= 1e-9 * std::max(1.0, peak));
  }
}

TEST_CASE("output at t ignores later inputs") {
  SplitMix64 rng(13);
  const int64_t T = 64;
  RealArray in({T, 1, 1});
  for (int64_t i = 0; i < T; ++i) in[i] = rng.normal();
  DecayKernel<double> k = build_lif_kernel(scalar_param(0.7), T);

  RealArray bumped = in.clone();
  const int64_t cut = 40;
  for (int64_t t = cut; t < T; ++t) bumped[t] += 100.0;

  SUBCASE("direct sum: earlier outputs are bit-identical") {
    RealSeq base = naive_convolve(RealSeq(in, SignalKind::current), k);
    RealSeq pert = naive_convolve(RealSeq(bumped, SignalKind::current), k);
    for (int64_t t = 0; t < cut; ++t) CHECK(pert.values[t] == base.values[t]);
    CHECK(pert.values[cut] != base.values[cut]);
  }
  SUBCASE("transform route: later inputs leak only rounding noise") {
    // the spectrum mixes all steps, so exact bit-identity is not guaranteed,
    // but any leak ahead of the cut must stay at rounding scale while the
    // genuine effect at the cut is order 100
    RealSeq base = causal_convolve(RealSeq(in, SignalKind::current), k);
    RealSeq pert = causal_convolve(RealSeq(bumped, SignalKind::current), k);
    for (int64_t t = 0; t < cut; ++t)
      CHECK(std::abs(pert.values[t] - base.values[t]) <= 1e-9);
    CHECK(std::abs(pert.values[cut] - base.values[cut]) > 50.0);
  }
}

TEST_CASE("shape mismatches are rejected") {
  DecayKernel<double> k = build_lif_kernel(scalar_param(0.5), 4);
  CHECK_THROWS(causal_convolve(seq_from({1, 2, 3}), k));  // steps mismatch
  RealArray betas({3});
  betas[0] = betas[1] = betas[2] = 0.5;
  DecayKernel<double> k3 = build_lif_kernel(betas, 3);
  CHECK_THROWS(causal_convolve(seq_from({1, 2, 3}), k3));  // 3 kernel channels, 1 lane channel
}

TEST_CASE("lane transposes round-trip and relocate correctly") {
  SplitMix64 rng(14);
  for (auto [steps, lanes] : {std::pair<int64_t, int64_t>{16, 24},
                              {7, 5},
                              {64, 64},
                              {33, 9}}) {
    std::vector<double> src((size_t)(steps * lanes));
    for (double& x : src) x = rng.normal();
    std::vector<double> lanes_buf(src.size()), back(src.size());
    transpose_to_lanes(src.data(), steps, lanes, lanes_buf.data());
    for (int64_t t = 0; t < steps; ++t)
      for (int64_t l = 0; l < lanes; ++l)
        CHECK(lanes_buf[(size_t)(l * steps + t)] == src[(size_t)(t * lanes + l)]);
    transpose_to_steps(lanes_buf.data(), lanes, steps, back.data());
    for (size_t i = 0; i < src.size(); ++i) CHECK(back[i] == src[i]);
  }
}

TEST_CASE("pooled scratch blocks are reused after release") {
  double* first = nullptr;
  {
    auto block = acquire_lane_scratch(4096);
    first = block.get();
    CHECK((reinterpret_cast<uintptr_t>(first) % 64) == 0);
    block.get()[0] = 1.0;
    block.get()[4095] = 2.0;
  }
  auto again = acquire_lane_scratch(4096);
  CHECK(again.get() == first);  // exact-size block came back from the pool
}

TEST_CASE("prepared spectra convolve lanes like the direct sum") {
  SplitMix64 rng(15);
  const int64_t steps = 37, channels = 3, batch = 2, lanes = batch * channels;
  RealArray betas({channels});
  for (int64_t i = 0; i < channels; ++i) betas[i] = rng.uniform(0.1, 0.9);
  DecayKernel<double> k = build_lif_kernel(betas, steps);
  KernelSpectrum spec = kernel_spectrum(k.rows.ptr(), channels, steps);
  CHECK(spec.bins == spec.pad / 2 + 1);

  std::vector<double> in((size_t)(lanes * steps)), out(in.size());
  for (double& x : in) x = rng.normal();
  convolve_lanes(in.data(), lanes, steps, spec, false, out.data());

  for (int64_t l = 0; l < lanes; ++l) {
    const int64_t c = l % channels;
    for (int64_t t = 0; t < steps; ++t) {
      double ref = 0.0;
      for (int64_t m = 0; m <= t; ++m) ref += k.rows[c * steps + (t - m)] * in[l * steps + m];
      CHECK(out[(size_t)(l * steps + t)] == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("conjugate spectra give the convolution adjoint") {
  // <conv(x), y> == <x, corr(y)> for every pairing => corr is the adjoint.
  SplitMix64 rng(16);
  const int64_t steps = 29, lanes = 4;
  RealArray beta({1});
  beta[0] = 0.6;
  DecayKernel<double> k = build_lif_kernel(beta, steps);
  KernelSpectrum spec = kernel_spectrum(k.rows.ptr(), 1, steps);

  std::vector<double> x((size_t)(lanes * steps)), y(x.size()), cx(x.size()), cy(x.size());
  for (double& v : x) v = rng.normal();
  for (double& v : y) v = rng.normal();
  convolve_lanes(x.data(), lanes, steps, spec, false, cx.data());
  convolve_lanes(y.data(), lanes, steps, spec, true, cy.data());
  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    lhs += cx[i] * y[i];
    rhs += x[i] * cy[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("batch-reduced correlation matches the direct sums") {
  SplitMix64 rng(17);
  const int64_t steps = 19, channels = 2, batch = 3;
  std::vector<double> a((size_t)(batch * channels * steps)), x(a.size());
  for (double& v : a) v = rng.normal();
  for (double& v : x) v = rng.normal();
  std::vector<double> rows((size_t)(channels * steps), -1.0);
  correlate_reduce_lanes(a.data(), x.data(), batch, channels, steps, rows.data());
  for (int64_t n = 0; n < channels; ++n)
    for (int64_t m = 0; m < steps; ++m) {
      double ref = 0.0;
      for (int64_t b = 0; b < batch; ++b) {
        const int64_t l = b * channels + n;
        for (int64_t t = m; t < steps; ++t)
          ref += a[(size_t)(l * steps + t)] * x[(size_t)(l * steps + t - m)];
      }
      CHECK(rows[(size_t)(n * steps + m)] == doctest::Approx(ref).epsilon(1e-10));
    }
}
