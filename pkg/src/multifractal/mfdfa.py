"""Multifractal detrended fluctuation analysis.

Pipeline: cumulative mean-centered profile -> two-ended segmentation at each
scale s -> order-m polynomial detrending per segment -> q-th order power mean
of the segment variances, with the logarithmic form at q = 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .series import ReturnSeries

__all__ = [
    "DegenerateSegmentError",
    "ProfileSeries",
    "MfdfaConfig",
    "FluctuationSurface",
    "compute_profile",
    "detrend_segment",
    "segment_variances",
    "fluctuation_at",
    "fluctuation_surface",
    "default_scale_grid",
    "DEFAULT_Q_GRID",
]

# exact multiples of 0.5 from -10 to 10; always contains 0 and 2
DEFAULT_Q_GRID = np.arange(-20, 21) * 0.5


class DegenerateSegmentError(ValueError):
    """A segment variance is zero where the q-th order mean is undefined."""


@dataclass(frozen=True)
class ProfileSeries:
    """Cumulative sums of mean-subtracted values, Y(i)."""

    values: np.ndarray
    source_len: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if len(v) != self.source_len:
            raise ValueError("profile length must equal source length")

    def __len__(self) -> int:
        return self.source_len


def compute_profile(x: ReturnSeries | np.ndarray) -> ProfileSeries:
    """Mean-centered cumulative sum; the final value vanishes by construction."""
    values = x.values if isinstance(x, ReturnSeries) else np.asarray(x, dtype=float)
    if len(values) < 4:
        raise ValueError("need at least 4 points for a profile")
    y = np.cumsum(values - np.mean(values))
    return ProfileSeries(y, len(values))


def default_scale_grid(n: int, s_min: int = 6, s_max: int | None = None,
                       n_scales: int = 30) -> np.ndarray:
    """~n_scales log-spaced integer scales in [s_min, s_max], deduplicated.

    s_max defaults to n//5; scales never exceed n//4 where the fluctuation
    function becomes statistically unstable.
    """
    if s_max is None:
        s_max = n // 5
    s_max = min(s_max, n // 4)
    if s_max <= s_min:
        raise ValueError(f"series too short for scale grid: s_max={s_max} <= s_min={s_min}")
    grid = np.unique(np.round(np.logspace(np.log10(s_min), np.log10(s_max), n_scales)).astype(int))
    return grid[(grid >= s_min) & (grid <= s_max)]


@dataclass(frozen=True)
class MfdfaConfig:
    """Knobs for one MF-DFA run.

    detrend_order 2 is the default (quadratic detrending); scale_grid=None
    derives a log-spaced grid from the series length at run time.
    """

    detrend_order: int = 2
    q_grid: np.ndarray = field(default_factory=lambda: DEFAULT_Q_GRID.copy())
    scale_grid: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        q = np.asarray(self.q_grid, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "q_grid", q)
        if self.detrend_order < 1:
            raise ValueError("detrend_order must be >= 1")
        if np.any(np.diff(q) <= 0):
            raise ValueError("q_grid must be strictly increasing")
        if not (np.any(q == 0.0) and np.any(q == 2.0)):
            raise ValueError("q_grid must contain q=0 and q=2")
        if self.scale_grid is not None:
            s = np.asarray(self.scale_grid, dtype=int)
            s.setflags(write=False)
            object.__setattr__(self, "scale_grid", s)
            if np.any(np.diff(s) <= 0):
                raise ValueError("scale_grid must be strictly increasing")

    def scales_for(self, n: int) -> np.ndarray:
        """Concrete scale grid for a series of length n, bounds-checked."""
        s = self.scale_grid if self.scale_grid is not None else default_scale_grid(n)
        if s[0] < self.detrend_order + 2:
            raise ValueError(f"smallest scale {s[0]} < m+2 = {self.detrend_order + 2}")
        if s[-1] > n // 4:
            raise ValueError(f"largest scale {s[-1]} exceeds N/4 = {n // 4}")
        return s


@dataclass(frozen=True)
class FluctuationSurface:
    """F_q(s) over a (q, s) grid; F[i, j] pairs q_grid[i] with scale_grid[j].

    Cells where the q-th order mean is undefined (zero segment variance at
    q <= 0) hold NaN and are listed in ``degenerate``.
    """

    q_grid: np.ndarray
    scale_grid: np.ndarray
    F: np.ndarray
    segment_counts: np.ndarray
    degenerate: tuple = ()

    def __post_init__(self):
        for name in ("q_grid", "scale_grid", "F", "segment_counts"):
            a = np.asarray(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.F.shape != (len(self.q_grid), len(self.scale_grid)):
            raise ValueError("F must be shaped (len(q_grid), len(scale_grid))")

    def column(self, q: float) -> np.ndarray:
        i = int(np.flatnonzero(self.q_grid == q)[0])
        return self.F[i]

    def to_tsv(self) -> str:
        """Columns: s, then one F column per q; 10 significant digits."""
        header = "s\t" + "\t".join(f"F_q={q:g}" for q in self.q_grid)
        lines = [header]
        for j, s in enumerate(self.scale_grid):
            vals = "\t".join(f"{self.F[i, j]:.9e}" for i in range(len(self.q_grid)))
            lines.append(f"{int(s)}\t{vals}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "FluctuationSurface":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        cols = lines[0].split("\t")
        if cols[0] != "s" or not all(c.startswith("F_q=") for c in cols[1:]):
            raise ValueError("not a fluctuation-surface TSV")
        q = np.array([float(c[4:]) for c in cols[1:]])
        body = np.array([[float(tok) for tok in ln.split("\t")] for ln in lines[1:]])
        scales = body[:, 0].astype(int)
        F = body[:, 1:].T
        counts = np.zeros(len(scales), dtype=int)  # source length unknown
        return cls(q, scales, F, counts)


def _design_matrix(s: int, m: int) -> np.ndarray:
    # centered/scaled abscissae keep the fit well-conditioned for large s
    t = (np.arange(1, s + 1) - (s + 1) / 2.0) / (s / 2.0)
    return np.vander(t, m + 1, increasing=True)


def detrend_segment(segment, m: int):
    """Least-squares order-m polynomial fit over the index 1..s.

    Returns (coefficients, residual_variance); coefficients are ascending
    powers of the within-segment index, residual_variance is the mean squared
    residual.
    """
    y = np.asarray(segment, dtype=float)
    s = len(y)
    if s < m + 2:
        raise ValueError(f"segment of length {s} too short for order {m} (need >= m+2)")
    V = _design_matrix(s, m)
    coef_t, _, rank, _ = np.linalg.lstsq(V, y, rcond=None)
    if rank < m + 1:
        raise DegenerateSegmentError("rank-deficient detrending system")
    resid = y - V @ coef_t
    variance = float(np.mean(resid**2))
    # map coefficients back from the scaled abscissa to the index 1..s
    poly = np.polynomial.Polynomial(coef_t, domain=[1, s], window=[-1, 1])
    coeffs = poly.convert().coef
    if len(coeffs) < m + 1:  # trailing zero coefficients are trimmed by convert()
        coeffs = np.pad(coeffs, (0, m + 1 - len(coeffs)))
    return coeffs, variance


def segment_variances(Y: ProfileSeries, s: int, m: int) -> np.ndarray:
    """Detrended residual variances of the 2*N_s two-ended segments.

    Entries 0..N_s-1 come from segmentation starting at the first point,
    entries N_s..2N_s-1 from segmentation starting at the last point, ordered
    so the first reversed segment is the tail of the series.
    """
    y = Y.values
    n = len(y)
    if s < m + 2:
        raise ValueError(f"scale {s} too small for order {m} (need >= m+2)")
    n_s = n // s
    if n_s < 1:
        raise ValueError(f"scale {s} exceeds series length {n}")
    forward = y[: n_s * s].reshape(n_s, s)
    backward = y[n - n_s * s:].reshape(n_s, s)[::-1]
    segments = np.vstack([forward, backward])
    V = _design_matrix(s, m)
    coef, _, rank, _ = np.linalg.lstsq(V, segments.T, rcond=None)
    if rank < m + 1:
        raise DegenerateSegmentError(f"rank-deficient detrending system at scale {s}")
    resid = segments.T - V @ coef
    return np.mean(resid**2, axis=0)


def fluctuation_at(variances, q: float) -> float:
    """q-th order fluctuation: power mean of segment variances.

    For q != 0 this is {mean(v^(q/2))}^(1/q); at q = 0 the logarithmic form
    exp(mean(ln v)/2). Computed in log space so extreme q stay finite.
    """
    v = np.asarray(variances, dtype=float)
    if v.size == 0:
        raise ValueError("empty variance list")
    if np.any(v < 0):
        raise ValueError("negative variance")
    zeros = v == 0.0
    if np.any(zeros) and (q <= 0 or np.all(zeros)):
        raise DegenerateSegmentError(
            f"zero segment variance makes F undefined at q={q:g}")
    with np.errstate(divide="ignore"):
        lv = np.log(v)
    if q == 0:
        return float(np.exp(np.mean(lv) / 2.0))
    return float(np.exp((logsumexp(0.5 * q * lv) - np.log(v.size)) / q))


def fluctuation_surface(x: ReturnSeries | np.ndarray, cfg: MfdfaConfig) -> FluctuationSurface:
    """F_q(s) over the full (q, s) grid.

    Cells hit by degenerate segments (zero variance at q <= 0) are flagged,
    stored as NaN and reported via a warning; downstream regressions skip
    them.
    """
    values = x.values if isinstance(x, ReturnSeries) else np.asarray(x, dtype=float)
    n = len(values)
    scales = cfg.scales_for(n)
    profile = compute_profile(values)
    q_grid = cfg.q_grid
    F = np.empty((len(q_grid), len(scales)))
    counts = np.empty(len(scales), dtype=int)
    degenerate = []
    for j, s in enumerate(scales):
        v = segment_variances(profile, int(s), cfg.detrend_order)
        counts[j] = v.size
        for i, q in enumerate(q_grid):
            try:
                F[i, j] = fluctuation_at(v, float(q))
            except DegenerateSegmentError:
                F[i, j] = np.nan
                degenerate.append((float(q), int(s)))
    if degenerate:
        warnings.warn(
            f"{len(degenerate)} degenerate (q, s) cells excluded from the surface, "
            f"first at q={degenerate[0][0]:g}, s={degenerate[0][1]}",
            stacklevel=2)
    return FluctuationSurface(q_grid, scales, F, counts, tuple(degenerate))
