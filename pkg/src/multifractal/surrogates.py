"""Shuffled and AAFT surrogate series for multifractality-source tests.

Shuffling destroys temporal order while keeping the value distribution; the
amplitude-adjusted Fourier transform keeps both the distribution (exactly)
and the linear correlation structure (approximately). Comparing spectra of
original, shuffled and surrogate series separates correlation-driven from
distribution-driven multifractality.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mfdfa import DegenerateSegmentError, MfdfaConfig, fluctuation_surface
from .series import ReturnSeries
from .spectra import FitRange, HurstSpectrum, hurst_spectrum

__all__ = [
    "RngStream",
    "EnsembleSpec",
    "shuffle",
    "aaft",
    "ensemble_hurst",
]


@dataclass(frozen=True)
class RngStream:
    """Seeded deterministic generator; same seed gives the same sequence on
    every platform."""

    seed: int
    algorithm: str = "pcg64"

    def __post_init__(self):
        if self.algorithm != "pcg64":
            raise ValueError(f"unknown rng algorithm {self.algorithm!r}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


@dataclass(frozen=True)
class EnsembleSpec:
    """How many surrogate realizations to average and how to build them."""

    n_realizations: int = 10
    method: str = "shuffle"
    base_seed: int = 0

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.method not in ("shuffle", "aaft"):
            raise ValueError(f"method must be 'shuffle' or 'aaft', got {self.method!r}")

    def realization(self, x: ReturnSeries, i: int) -> ReturnSeries:
        rng = RngStream(self.base_seed + i)
        return shuffle(x, rng) if self.method == "shuffle" else aaft(x, rng)


def shuffle(x: ReturnSeries, rng: RngStream) -> ReturnSeries:
    """Uniform random permutation of the values; timestamps stay in place."""
    if len(x) < 2:
        raise ValueError("need at least 2 values to shuffle")
    return x.with_values(rng.generator().permutation(x.values))


def aaft(x: ReturnSeries, rng: RngStream) -> ReturnSeries:
    """Amplitude-adjusted Fourier-transform surrogate (single iteration).

    1. Rank-order a sorted Gaussian sample onto the data's ranks.
    2. Randomize Fourier phases, keeping the DC term (and the Nyquist term
       for even length) real so the inverse transform is real for any N.
    3. Rank-order the original values onto the randomized series' ranks.

    The output multiset equals the input multiset exactly; ties in either
    rank ordering break by original index.
    """
    n = len(x)
    if n < 8:
        raise ValueError("need at least 8 values for an AAFT surrogate")
    gen = rng.generator()
    values = x.values

    gauss = np.sort(gen.standard_normal(n))
    gaussianized = gauss[_ranks(values)]

    spec = np.fft.rfft(gaussianized)
    phases = gen.uniform(0.0, 2.0 * np.pi, size=spec.size)
    phases[0] = 0.0
    if n % 2 == 0:
        phases[-1] = 0.0
    randomized = np.fft.irfft(spec * np.exp(1j * phases), n=n)

    out = np.sort(values)[_ranks(randomized)]
    return x.with_values(out)


def _ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.intp)
    ranks[order] = np.arange(len(values))
    return ranks


def ensemble_hurst(x: ReturnSeries, spec: EnsembleSpec, cfg: MfdfaConfig,
                   fit_range: FitRange | None = None) -> HurstSpectrum:
    """Mean h(q) over an ensemble of surrogate realizations.

    Realization i is seeded with base_seed + i, so parallel and serial
    schedules agree. For a single realization the full per-q OLS spectrum is
    returned as-is; for n >= 2 the cross-realization standard deviation over
    sqrt(n) replaces the OLS error. Realizations that hit degenerate segments
    are dropped with a warning and counted in ``n_excluded``.
    """
    runs = []
    excluded = 0
    for i in range(spec.n_realizations):
        surrogate = spec.realization(x, i)
        try:
            surf = fluctuation_surface(surrogate, cfg)
            runs.append(hurst_spectrum(surf, fit_range))
        except (DegenerateSegmentError, ValueError) as exc:
            excluded += 1
            warnings.warn(f"realization {i} (seed {spec.base_seed + i}) excluded: {exc}",
                          stacklevel=2)
    if not runs:
        raise RuntimeError("every ensemble realization failed")
    if len(runs) == 1:
        base = runs[0]
        return HurstSpectrum(base.q_grid, base.h, base.h_err, base.r2,
                             base.fit_range, n_excluded=excluded)
    hs = np.vstack([r.h for r in runs])
    r2 = np.vstack([r.r2 for r in runs]).mean(axis=0)
    h_mean = hs.mean(axis=0)
    h_err = hs.std(axis=0, ddof=1) / np.sqrt(len(runs))
    return HurstSpectrum(runs[0].q_grid, h_mean, h_err, r2,
                         runs[0].fit_range, n_excluded=excluded)
