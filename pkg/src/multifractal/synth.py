"""Synthetic test series: white noise, heavy tails, linear correlation.

These are the control signals used to validate the analysis chain - each has
a known h(q), tail exponent or autocorrelation target. The cascade generator
lives in :mod:`multifractal.gbm`.
"""

from __future__ import annotations

import numpy as np

from .surrogates import RngStream

__all__ = [
    "white_noise",
    "pareto_symmetric",
    "ar1_fourier_noise",
]


def white_noise(n: int, rng: RngStream) -> np.ndarray:
    """i.i.d. standard Gaussian draws; monofractal with h(q) = 0.5."""
    if n < 1:
        raise ValueError("n must be positive")
    return rng.generator().standard_normal(n)


def pareto_symmetric(n: int, tail_index: float, rng: RngStream) -> np.ndarray:
    """Uncorrelated series with symmetric power-law tails.

    |x| follows a Pareto law with the given tail index (|x| >= 1), signs are
    fair coin flips. Uncorrelated heavy-tailed series like this are the
    standard bifractal reference: h(q) ~ 1/q above the tail index and
    ~ 1/tail_index below it.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if tail_index <= 0:
        raise ValueError("tail_index must be positive")
    gen = rng.generator()
    magnitudes = gen.uniform(size=n) ** (-1.0 / tail_index)
    signs = gen.integers(0, 2, size=n) * 2 - 1
    return magnitudes * signs


def ar1_fourier_noise(n: int, phi: float, rng: RngStream) -> np.ndarray:
    """Gaussian noise with an AR(1)-shaped power spectrum, built by Fourier
    filtering.

    White noise is shaped in the frequency domain by the AR(1) transfer
    amplitude 1/|1 - phi e^{-2 pi i f}|, giving autocorrelation ~ phi^s
    (up to circular wraparound). Output is rescaled to unit variance.
    """
    if n < 8:
        raise ValueError("n must be >= 8")
    if not -1.0 < phi < 1.0:
        raise ValueError("phi must be in (-1, 1)")
    gen = rng.generator()
    spec = np.fft.rfft(gen.standard_normal(n))
    freqs = np.fft.rfftfreq(n)
    gain = 1.0 / np.abs(1.0 - phi * np.exp(-2j * np.pi * freqs))
    out = np.fft.irfft(spec * gain, n=n)
    sd = float(np.std(out))
    if sd == 0.0:
        raise RuntimeError("degenerate filtered noise")
    return (out - out.mean()) / sd
