#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "spikeseq/analysis.hpp"
#include "spikeseq/energy.hpp"

using namespace spikeseq;

TEST_CASE("closed-form gain: worked values and peak location") {
  const double tau = 2.0, theta = 1.0;
  std::vector<double> omegas{0.0, 1.0, 1.5};
  std::vector<double> g = frequency_response_closed(tau, theta, omegas);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(1.0 / std::sqrt(1.25)));
  CHECK(g[1] == doctest::Approx(2.0));  // 1/sqrt((1/2)^2) = tau at resonance
  CHECK(g[2] == doctest::Approx(1.0 / std::sqrt(0.5)));

  // dense grid: argmax sits exactly on the preferred frequency
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(theta * (double)i / 50.0);
  std::vector<double> gg = frequency_response_closed(tau, theta, grid);
  const size_t peak = (size_t)(std::max_element(gg.begin(), gg.end()) - gg.begin());
  CHECK(grid[peak] == doctest::Approx(theta));
  CHECK(gg[peak] == doctest::Approx(tau));
}

TEST_CASE("simulated gain tracks the closed form near resonance") {
  FreqSimConfig cfg;  // tau=2, theta=0.5, delta=0.1
  std::vector<double> omegas;
  for (int i = -5; i <= 5; ++i) omegas.push_back(cfg.theta + 0.02 * (double)i);
  std::vector<double> sim = frequency_response_sim(cfg, omegas);
  std::vector<double> closed = frequency_response_closed(cfg.tau, cfg.theta, omegas);
  REQUIRE(sim.size() == omegas.size());
  for (size_t i = 0; i < sim.size(); ++i)
    CHECK(sim[i] == doctest::Approx(closed[i]).epsilon(0.10));
  const size_t peak = (size_t)(std::max_element(sim.begin(), sim.end()) - sim.begin());
  CHECK(std::abs(omegas[peak] - cfg.theta) < 0.021);
  CHECK(sim[peak] == doctest::Approx(cfg.tau).epsilon(0.10));
}

TEST_CASE("soft reset equals the threshold-adaptation form on random cases") {
  MatchReport r = check_reset_as_threshold(50, 424242);
  CHECK(r.cases == 50);
  CHECK(r.spike_mismatches == 0);
  CHECK(r.trace_mismatches == 0);
  CHECK(r.passed());
}

TEST_CASE("zero-frequency unit-step oscillator degenerates to a plain accumulator") {
  MatchReport r = check_oscillator_degenerates(30, 99);
  CHECK(r.cases == 30);
  CHECK(r.passed());
}

TEST_CASE("membrane variance closed forms") {
  const double d = 0.5, tau = 4.0, sigma = 1.0;
  const double limit = variance_limit(d, tau, sigma);
  CHECK(limit == doctest::Approx(1.1302).epsilon(1e-4));
  CHECK(variance_approx(d, tau, sigma) == doctest::Approx(1.0));
  // one noise sample in: variance is just the squared injection gain
  CHECK(variance_exact(d, tau, sigma, 1) == doctest::Approx(d * d * sigma * sigma));
  // long horizon converges to the stationary value
  CHECK(variance_exact(d, tau, sigma, 400) == doctest::Approx(limit).epsilon(1e-12));
  // scale-free in sigma^2
  CHECK(variance_limit(d, tau, 3.0) == doctest::Approx(9.0 * limit));
  CHECK(variance_limit(d, tau, 0.0) == 0.0);
  // small-step regime: approximation within 1 percent
  const double d2 = 0.04, tau2 = 4.0;  // delta/tau = 0.01
  CHECK(variance_approx(d2, tau2, 1.0) ==
        doctest::Approx(variance_limit(d2, tau2, 1.0)).epsilon(0.01));
}

TEST_CASE("Monte Carlo variance estimate is consistent and deterministic") {
  VarianceReport r = check_membrane_variance(0.5, 4.0, 1.0, 20000, 0, 1234);
  CHECK(r.steps == 28);  // first horizon with transient below 1e-3
  CHECK(r.trials == 20000);
  CHECK(r.exact_value == doctest::Approx(variance_exact(0.5, 4.0, 1.0, 28)));
  CHECK(r.limit_value == doctest::Approx(1.1302).epsilon(1e-4));
  CHECK(r.approx_value == doctest::Approx(1.0));
  CHECK(r.rel_se > 0.0);
  CHECK(std::abs(r.empirical - r.exact_value) <= 3.0 * r.rel_se * r.exact_value);

  VarianceReport r2 = check_membrane_variance(0.5, 4.0, 1.0, 20000, 0, 1234);
  CHECK(r2.empirical == r.empirical);  // same seed, same estimate

  CHECK_THROWS(check_membrane_variance(2.0, 1.0, 1.0, 100, 0, 1));  // tau <= delta
  CHECK_THROWS(check_membrane_variance(0.5, 4.0, 1.0, 1, 0, 1));    // too few trials
}

TEST_CASE("kernel-spike alignment distinguishes placements a sum conflates") {
  SUBCASE("real kernel worked example") {
    const double k[3] = {1.0, 0.5, 0.25};
    const double s[3] = {1.0, 0.0, 1.0};
    CHECK(kernel_spike_alignment(k, s, 3) == doctest::Approx(1.25));
    const double zeros[3] = {0.0, 0.0, 0.0};
    CHECK(kernel_spike_alignment(k, zeros, 3) == 0.0);
  }
  SUBCASE("oscillating kernel separates mirrored spike trains") {
    const int64_t n = 4;
    std::complex<double> k[n];
    for (int64_t t = 0; t < n; ++t)
      k[t] = std::polar(std::pow(0.9, (double)t), M_PI_2 * (double)t);
    const double a[n] = {1.0, 0.0, 0.0, 1.0};
    const double b[n] = {0.0, 1.0, 1.0, 0.0};
    const double fa = kernel_spike_alignment(k, a, n);
    const double fb = kernel_spike_alignment(k, b, n);
    CHECK(std::abs(fa - fb) > 0.1);

    const double flat[n] = {1.0, 1.0, 1.0, 1.0};  // constant kernel: conflated
    CHECK(kernel_spike_alignment(flat, a, n) == doctest::Approx(kernel_spike_alignment(flat, b, n)));
  }
}

TEST_CASE("firing-rate statistics") {
  RealArray silent({4, 2}, 0.0);
  RealArray dense({2, 2}, 1.0);
  RealArray quarter({2, 4}, 0.0);
  quarter[0] = 1.0;
  quarter[5] = 1.0;
  FiringRateReport r = firing_rate_stats({&silent, &dense, &quarter});
  REQUIRE(r.per_layer.size() == 3);
  CHECK(r.per_layer[0] == 0.0);
  CHECK(r.per_layer[1] == 1.0);
  CHECK(r.per_layer[2] == doctest::Approx(0.25));
  CHECK(r.overall == doctest::Approx(6.0 / 20.0));  // element-weighted
}

TEST_CASE("energy model: family names and validation") {
  for (LayerFamily f :
       {LayerFamily::ours, LayerFamily::s4_legs, LayerFamily::binary_s4d, LayerFamily::gsu})
    CHECK(parse_family(family_name(f)) == f);
  CHECK_THROWS(parse_family("transformer"));

  EnergyConstants c;
  LayerSpec bad;
  bad.rate_token = 1.5;
  CHECK_THROWS(estimate_energy({bad}, c, 10));
  LayerSpec neg;
  neg.width = 0;
  CHECK_THROWS(estimate_energy({neg}, c, 10));
  CHECK_THROWS(estimate_energy({LayerSpec{}}, c, 0));
}

TEST_CASE("energy model: hand-computed per-step costs") {
  EnergyConstants c;  // 4.6 / 0.9 / 3.7 pJ
  const int64_t d = 16, h = 8;

  SUBCASE("silent spiking layer costs only the state update plus bias adds") {
    LayerSpec spec;
    spec.family = LayerFamily::ours;
    spec.width = d;
    spec.rate_token = 0.0;
    spec.rate_channel = 0.0;
    EnergyReport r = estimate_energy({spec}, c, 1);
    REQUIRE(r.layers.size() == 1);
    CHECK(r.layers[0].token_pj == doctest::Approx(c.e_mult * 5 * d + c.e_ac * (3 * d + d)));
    CHECK(r.layers[0].channel_pj == doctest::Approx(c.e_ac * (double)d));
    CHECK(r.layers[0].total_pj ==
          doctest::Approx(r.layers[0].token_pj + r.layers[0].channel_pj));
  }
  SUBCASE("dense state-space layer pays full multiply-accumulate") {
    LayerSpec spec;
    spec.family = LayerFamily::s4_legs;
    spec.width = d;
    spec.state = h;
    EnergyReport r = estimate_energy({spec}, c, 1);
    const double token = c.e_mac * (double)(h * h + 2 * d * h + d * d);
    const double channel = c.e_mac * (double)(2 * d * d + 2 * d) + c.e_mult * (double)d;
    CHECK(r.layers[0].token_pj == doctest::Approx(token));
    CHECK(r.layers[0].channel_pj == doctest::Approx(channel));
  }
  SUBCASE("spike-rate gating scales the matmul terms linearly") {
    LayerSpec lo, hi;
    lo.family = hi.family = LayerFamily::ours;
    lo.width = hi.width = d;
    lo.rate_token = lo.rate_channel = 0.1;
    hi.rate_token = hi.rate_channel = 0.2;
    EnergyReport rl = estimate_energy({lo}, c, 1);
    EnergyReport rh = estimate_energy({hi}, c, 1);
    const double base_tok = c.e_mult * 5 * d + c.e_ac * (3 * d + d);
    CHECK(rh.layers[0].token_pj - base_tok ==
          doctest::Approx(2.0 * (rl.layers[0].token_pj - base_tok)));
    CHECK(rh.layers[0].channel_pj - c.e_ac * d ==
          doctest::Approx(2.0 * (rl.layers[0].channel_pj - c.e_ac * d)));
  }
  SUBCASE("total energy is linear in sequence length") {
    LayerSpec spec;
    spec.family = LayerFamily::s4_legs;
    spec.width = d;
    spec.state = h;
    EnergyReport r1 = estimate_energy({spec}, c, 1000);
    EnergyReport r2 = estimate_energy({spec}, c, 2000);
    CHECK(r2.total_mj == doctest::Approx(2.0 * r1.total_mj));
    CHECK(r1.total_mj == doctest::Approx(r1.per_step_pj * 1000.0 * 1e-9));
  }
}

TEST_CASE("energy model: 8-layer text-benchmark stack vs dense baseline") {
  EnergyConstants c;
  std::vector<LayerSpec> ours(8), dense(8);
  for (int i = 0; i < 8; ++i) {
    ours[(size_t)i].family = LayerFamily::ours;
    ours[(size_t)i].width = 128;
    ours[(size_t)i].rate_token = 0.0353;
    ours[(size_t)i].rate_channel = 0.0353;
    dense[(size_t)i].family = LayerFamily::s4_legs;
    dense[(size_t)i].width = 128;
    dense[(size_t)i].state = 64;
  }
  EnergyReport ro = estimate_energy(ours, c, 2048);
  EnergyReport rd = estimate_energy(dense, c, 2048);
  const double ratio = ro.per_step_pj / rd.per_step_pj;
  CHECK(ratio == doctest::Approx(0.01238).epsilon(1e-3));
  CHECK(ratio < 0.05);
}
