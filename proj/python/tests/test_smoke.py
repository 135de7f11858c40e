"""Smoke tests for the python extension: route agreement, worked kernel
values, the verification suites, and a tiny training run."""

import numpy as np
import pytest

import spikeseq as sq


def rand_input(steps, batch, channels, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((steps, batch, channels))


def test_lif_kernel_values():
    k = sq.lif_kernel(np.array([0.5]), 4)
    assert k.shape == (1, 4)
    np.testing.assert_allclose(k[0], [1.0, 0.5, 0.25, 0.125])


def test_prf_kernel_magnitude_and_phase():
    k = sq.prf_kernel(np.array([0.1]), np.array([2.0]), np.array([0.5]), 8)
    assert k.dtype == np.complex128
    ratios = k[0, 1:] / k[0, :-1]
    np.testing.assert_allclose(np.abs(ratios), np.exp(-0.1 / 2.0), rtol=1e-12)
    np.testing.assert_allclose(np.angle(ratios), 0.1 * 0.5, rtol=1e-12)


def test_convolve_matches_direct_sum():
    x = rand_input(32, 2, 3, seed=0)
    k = sq.lif_kernel(np.array([0.7, 0.8, 0.9]), 32)
    y = sq.convolve(x, k)
    t = 17
    direct = sum(x[t - j] * k[:, j] for j in range(t + 1))
    np.testing.assert_allclose(y[t], direct, rtol=1e-12, atol=1e-12)


def test_leaky_routes_agree():
    x = rand_input(128, 4, 8, seed=1)
    betas = np.full(8, 0.9)
    s_seq, u_seq = sq.lif_sequential(x, betas)
    s_par, u_par, thresholds = sq.lif_parallel(x, betas)
    np.testing.assert_array_equal(s_seq, s_par)  # bitwise
    np.testing.assert_allclose(u_seq, u_par, atol=1e-12)
    assert thresholds.min() >= 1.0  # running threshold never drops below v_th


def test_oscillator_routes_agree():
    x = rand_input(96, 2, 4, seed=2)
    delta, tau, theta = np.full(4, 0.2), np.full(4, 3.0), np.full(4, 0.8)
    s_seq, u_seq = sq.prf_sequential(x, delta, tau, theta)
    s_par, u_par = sq.prf_parallel(x, delta, tau, theta)
    s_dep, re, im = sq.prf_deploy(x, delta, tau, theta)
    np.testing.assert_array_equal(s_seq, s_par)
    np.testing.assert_array_equal(s_seq, s_dep)
    np.testing.assert_allclose(u_seq, u_par, atol=1e-10)
    np.testing.assert_allclose(u_seq.real, re, atol=1e-10)
    np.testing.assert_allclose(u_seq.imag, im, atol=1e-10)


def test_spatial_gate():
    x = np.array([[[0.5, 1.2]]])
    out = sq.spatial(x, np.array([2.0, 2.0]))
    np.testing.assert_array_equal(out, [[[0.0, 2.0]]])


def test_equivalence_suite_and_negative_control():
    rep = sq.run_equivalence(cases=25, seed=7, max_steps=128)
    assert rep["passed"]
    assert rep["cases_run"] == 50  # per enabled family
    assert rep["spike_mismatches"] == 0
    assert rep["max_rel_err_leaky"] < 1e-9

    bad = sq.run_equivalence(cases=5, seed=7, max_steps=64, inject_kernel_bug=True)
    assert not bad["passed"]


def test_reset_and_degeneracy_checks():
    assert sq.check_reset_as_threshold(cases=50, seed=3)["passed"]
    assert sq.check_oscillator_degenerates(cases=20, seed=4)["passed"]


def test_membrane_variance_closed_forms():
    rep = sq.membrane_variance(delta=0.5, tau=4.0, sigma=1.0, trials=5000, seed=9)
    assert rep["limit"] == pytest.approx(1.1302, abs=1e-4)
    assert rep["approx"] == pytest.approx(1.0)
    assert abs(rep["empirical"] - rep["exact"]) <= 4 * rep["rel_se"] * rep["exact"]


def test_frequency_response_peak():
    omegas = np.linspace(0.0, 1.0, 101)
    closed, sim = sq.frequency_response(tau=2.0, theta=0.5, delta=0.1, steps=4096, omegas=omegas)
    closed, sim = np.asarray(closed), np.asarray(sim)
    assert omegas[np.argmax(closed)] == pytest.approx(0.5)
    assert closed.max() == pytest.approx(2.0)
    assert abs(sim.max() - 2.0) / 2.0 < 0.10


def test_energy_ratio():
    ours = [dict(family="ours", width=128, rate_token=0.0353, rate_channel=0.0353)] * 8
    dense = [dict(family="s4-legs", width=128, state=64)] * 8
    r_ours = sq.estimate_energy(ours, seq_len=2048)
    r_dense = sq.estimate_energy(dense, seq_len=2048)
    ratio = r_ours["per_step_pj"] / r_dense["per_step_pj"]
    assert ratio == pytest.approx(0.01238, abs=1e-4)
    with pytest.raises(Exception):
        sq.estimate_energy([dict(family="transformer")], seq_len=1)


def test_train_impulse_smoke():
    hist = sq.train_impulse(epochs=2)
    assert len(hist) == 2
    assert all(np.isfinite(h["train_loss"]) for h in hist)
    assert all(0.0 <= h["test_acc"] <= 1.0 for h in hist)
    # deterministic given the same seeds
    again = sq.train_impulse(epochs=2)
    assert [h["train_loss"] for h in again] == [h["train_loss"] for h in hist]


def test_shape_validation():
    with pytest.raises(Exception):
        sq.lif_sequential(np.zeros((4, 4)), np.array([0.5]))  # not 3-d
    with pytest.raises(Exception):
        sq.prf_sequential(
            np.zeros((4, 1, 1)), np.array([1.0]), np.array([0.5]), np.array([0.0])
        )  # tau <= delta
