"""Spiking sequence engine: parallel leaky and resonate neurons.

Sequence tensors are fp64 numpy arrays in time-major layout
(steps, batch, channels); oscillator membranes are complex128. The
stepwise and convolution-based routes of each neuron produce identical
spike trains; `run_equivalence` checks that property over random
configurations.
"""

from ._spikeseq import (
    __version__,
    check_oscillator_degenerates,
    check_reset_as_threshold,
    convolve,
    convolve_complex,
    estimate_energy,
    frequency_response,
    lif_kernel,
    lif_parallel,
    lif_sequential,
    membrane_variance,
    prf_deploy,
    prf_kernel,
    prf_parallel,
    prf_sequential,
    run_bench,
    run_equivalence,
    spatial,
    train_impulse,
)

__all__ = [
    "__version__",
    "check_oscillator_degenerates",
    "check_reset_as_threshold",
    "convolve",
    "convolve_complex",
    "estimate_energy",
    "frequency_response",
    "lif_kernel",
    "lif_parallel",
    "lif_sequential",
    "membrane_variance",
    "prf_deploy",
    "prf_kernel",
    "prf_parallel",
    "prf_sequential",
    "run_bench",
    "run_equivalence",
    "spatial",
    "train_impulse",
]
