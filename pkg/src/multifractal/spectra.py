"""Scaling exponents from a fluctuation surface.

h(q) comes from an OLS fit of ln F_q(s) on ln s inside a fit range, tau(q)
from the mass-exponent relation q*h(q) - 1, and the singularity spectrum
f(alpha) from a finite-difference Legendre transform of tau.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .mfdfa import FluctuationSurface

__all__ = [
    "FitRange",
    "HurstSpectrum",
    "TauSpectrum",
    "SingularitySpectrum",
    "default_fit_range",
    "hurst_spectrum",
    "tau_from_h",
    "singularity_spectrum",
    "spectrum_width",
]

MIN_FIT_SCALES = 5

# below this alpha spread a spectrum is reported as monofractal
MONOFRACTAL_ALPHA_SPREAD = 1e-9


@dataclass(frozen=True)
class FitRange:
    """Inclusive scale bounds for the log-log regression."""

    s_lo: float
    s_hi: float

    def __post_init__(self):
        if not self.s_lo < self.s_hi:
            raise ValueError("fit range must satisfy s_lo < s_hi")

    def mask(self, scale_grid: np.ndarray) -> np.ndarray:
        return (scale_grid >= self.s_lo) & (scale_grid <= self.s_hi)


def default_fit_range(n: int) -> FitRange:
    """Long series fit 50..800; short series (N < 2000) fit 10..60."""
    return FitRange(10, 60) if n < 2000 else FitRange(50, 800)


@dataclass(frozen=True)
class HurstSpectrum:
    """Generalized Hurst exponents h(q) with per-q OLS uncertainty."""

    q_grid: np.ndarray
    h: np.ndarray
    h_err: np.ndarray
    r2: np.ndarray
    fit_range: FitRange
    n_excluded: int = 0

    def __post_init__(self):
        for name in ("q_grid", "h", "h_err", "r2"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (len(self.q_grid) == len(self.h) == len(self.h_err) == len(self.r2)):
            raise ValueError("q_grid, h, h_err, r2 must share one length")
        if np.any(self.h_err < 0):
            raise ValueError("h_err must be nonnegative")

    def at(self, q: float) -> float:
        return float(self.h[int(np.flatnonzero(self.q_grid == q)[0])])

    def to_tsv(self) -> str:
        lines = ["q\th\th_err\tr2"]
        for q, h, e, r in zip(self.q_grid, self.h, self.h_err, self.r2):
            lines.append(f"{q:g}\t{h:.10g}\t{e:.10g}\t{r:.10g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str, fit_range: FitRange | None = None) -> "HurstSpectrum":
        rows = [ln.split("\t") for ln in text.splitlines() if ln.strip()]
        if rows[0][:2] != ["q", "h"]:
            raise ValueError("not an h(q) TSV")
        body = np.array([[float(t) for t in r] for r in rows[1:]])
        return cls(body[:, 0], body[:, 1], body[:, 2], body[:, 3],
                   fit_range or FitRange(0.5, np.inf))


@dataclass(frozen=True)
class TauSpectrum:
    """Mass exponents tau(q) = q*h(q) - 1."""

    q_grid: np.ndarray
    tau: np.ndarray
    tau_err: np.ndarray

    def __post_init__(self):
        for name in ("q_grid", "tau", "tau_err"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        i0 = np.flatnonzero(self.q_grid == 0.0)
        if i0.size and self.tau[i0[0]] != -1.0:
            raise ValueError("tau(0) must equal -1 exactly")

    def to_tsv(self) -> str:
        lines = ["q\ttau\ttau_err"]
        for q, t, e in zip(self.q_grid, self.tau, self.tau_err):
            lines.append(f"{q:g}\t{t:.10g}\t{e:.10g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SingularitySpectrum:
    """Holder exponents alpha(q) and spectrum values f(alpha).

    Noisy empirical tau need not be concave, so f may poke slightly above 1
    away from q=0; model-consistent inputs keep max f <= 1.
    """

    q_grid: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    width_at_zero: float = field(default=np.nan)

    def __post_init__(self):
        for name in ("q_grid", "alpha", "f"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (len(self.q_grid) == len(self.alpha) == len(self.f)):
            raise ValueError("q_grid, alpha, f must share one length")
        if np.isnan(self.width_at_zero):
            object.__setattr__(self, "width_at_zero", spectrum_width(self))

    @property
    def monofractal(self) -> bool:
        return float(np.ptp(self.alpha)) < MONOFRACTAL_ALPHA_SPREAD

    def to_tsv(self) -> str:
        lines = ["q\talpha\tf"]
        for q, a, f in zip(self.q_grid, self.alpha, self.f):
            lines.append(f"{q:g}\t{a:.10g}\t{f:.10g}")
        return "\n".join(lines) + "\n"


def _ols_loglog(log_s: np.ndarray, log_f: np.ndarray):
    n = len(log_s)
    xm = log_s - log_s.mean()
    sxx = float(xm @ xm)
    if sxx == 0.0:
        raise ValueError("degenerate regressor: all scales equal")
    slope = float(xm @ log_f) / sxx
    intercept = float(log_f.mean()) - slope * float(log_s.mean())
    resid = log_f - (slope * log_s + intercept)
    ssr = float(resid @ resid)
    sst = float(np.sum((log_f - log_f.mean()) ** 2))
    stderr = np.sqrt(ssr / (n - 2) / sxx) if n > 2 else 0.0
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    return slope, float(stderr), float(r2)


def hurst_spectrum(surf: FluctuationSurface, fit_range: FitRange | None = None) -> HurstSpectrum:
    """Per-q OLS slope of ln F_q(s) vs ln s over scales inside the fit range.

    Degenerate (NaN) surface cells are skipped with a warning; at least
    MIN_FIT_SCALES valid scales must remain for every q.
    """
    if fit_range is None:
        fit_range = default_fit_range(int(surf.scale_grid[-1]) * 5)
    in_range = fit_range.mask(surf.scale_grid)
    if int(in_range.sum()) < MIN_FIT_SCALES:
        raise ValueError(
            f"only {int(in_range.sum())} scales inside fit range "
            f"[{fit_range.s_lo:g}, {fit_range.s_hi:g}]; need >= {MIN_FIT_SCALES}")
    log_s_all = np.log(surf.scale_grid.astype(float))
    h = np.empty(len(surf.q_grid))
    h_err = np.empty_like(h)
    r2 = np.empty_like(h)
    skipped = 0
    for i, q in enumerate(surf.q_grid):
        valid = in_range & np.isfinite(surf.F[i])
        skipped += int(in_range.sum()) - int(valid.sum())
        if int(valid.sum()) < MIN_FIT_SCALES:
            raise ValueError(
                f"fewer than {MIN_FIT_SCALES} non-degenerate scales at q={q:g}")
        h[i], h_err[i], r2[i] = _ols_loglog(log_s_all[valid], np.log(surf.F[i][valid]))
    if skipped:
        warnings.warn(f"{skipped} degenerate surface cells skipped in h(q) regression",
                      stacklevel=2)
    return HurstSpectrum(surf.q_grid, h, h_err, r2, fit_range)


def tau_from_h(h: HurstSpectrum) -> TauSpectrum:
    """tau(q) = q*h(q) - 1; tau(0) = -1 exactly. Errors scale as |q|*h_err."""
    return TauSpectrum(h.q_grid, h.q_grid * h.h - 1.0, np.abs(h.q_grid) * h.h_err)


def singularity_spectrum(tau: TauSpectrum) -> SingularitySpectrum:
    """Legendre transform by finite differences on a uniform q grid.

    alpha is the central difference of tau (one-sided at the endpoints) and
    f = q*alpha - tau, so f = 1 exactly at q = 0.
    """
    q = tau.q_grid
    t = tau.tau
    if len(q) < 3:
        raise ValueError("need at least 3 q points")
    dq = np.diff(q)
    step = float(np.mean(dq))
    if np.any(np.abs(dq - step) > 1e-9 * max(abs(step), 1.0)):
        raise ValueError("q grid must be uniformly spaced")
    alpha = np.empty_like(t)
    alpha[1:-1] = (t[2:] - t[:-2]) / (2.0 * step)
    alpha[0] = (t[1] - t[0]) / step
    alpha[-1] = (t[-1] - t[-2]) / step
    f = q * alpha - t
    return SingularitySpectrum(q, alpha, f)


def _branch_alpha_at_zero(alpha: np.ndarray, f: np.ndarray) -> float:
    """alpha where a spectrum branch meets f=0, walking outward from the apex.

    The branch arrays start at the apex. Interpolates linearly at the first
    f=0 crossing inside the branch; a branch that stays above zero ends at
    its outermost computed point.
    """
    below = np.flatnonzero(f <= 0.0)
    if below.size:
        k = int(below[0])
        if k == 0 or f[k] == f[k - 1]:
            return float(alpha[k])
        w = f[k - 1] / (f[k - 1] - f[k])
        return float(alpha[k - 1] + w * (alpha[k] - alpha[k - 1]))
    return float(alpha[-1])


def spectrum_width(ss: SingularitySpectrum) -> float:
    """Width of the spectrum at f = 0, the multifractality strength.

    Splits the spectrum at its apex into the positive-q and negative-q
    branches and measures between the points where each branch meets f = 0
    (interpolated at a crossing, the outermost computed point otherwise).
    The asymptotic f=0 width lies beyond any finite q grid, so widen the
    grid when the asymptote itself is wanted; blindly extrapolating shallow
    empirical branches would inflate near-monofractal widths by ~2/max|q|.
    Monofractal spectra give 0.
    """
    if len(ss.q_grid) < 3:
        raise ValueError("need at least 3 spectrum points")
    if float(np.ptp(ss.alpha)) < MONOFRACTAL_ALPHA_SPREAD:
        return 0.0
    apex = int(np.argmax(ss.f))
    lo = _branch_alpha_at_zero(ss.alpha[apex:], ss.f[apex:])
    hi = _branch_alpha_at_zero(ss.alpha[apex::-1], ss.f[apex::-1])
    return abs(hi - lo)
