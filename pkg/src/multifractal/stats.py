"""Autocorrelation and tail-exponent diagnostics for normalized returns.

The direct autocorrelation is a preliminary check (trends can contaminate
it); the detrended analysis in :mod:`multifractal.mfdfa` is the rigorous
tool. The complementary CDF of absolute normalized returns and its power-law
tail exponent locate the critical order of divergent moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .series import ReturnSeries

__all__ = [
    "AcfResult",
    "Ccdf",
    "TailFit",
    "autocorrelation",
    "empirical_ccdf",
    "tail_exponent",
]

NORMALIZATION_TOL = 1e-6

# OLS r2 below this marks the tail as not power-law-like
POWER_LAW_R2 = 0.98


@dataclass(frozen=True)
class AcfResult:
    """Autocorrelation c(s) = sum(x_i x_{i+s}) / (N - s) per lag."""

    lags: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lags", np.asarray(self.lags, dtype=int))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if len(self.lags) != len(self.c):
            raise ValueError("lags and c must have equal length")

    def to_tsv(self) -> str:
        lines = ["lag\tc"]
        for s, c in zip(self.lags, self.c):
            lines.append(f"{int(s)}\t{c:.10g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Ccdf:
    """Complementary CDF points (value, probability), values descending."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        if len(self.values) != len(self.probs):
            raise ValueError("values and probs must have equal length")

    def __len__(self) -> int:
        return len(self.values)

    def to_tsv(self) -> str:
        lines = ["value\tprob"]
        for v, p in zip(self.values, self.probs):
            lines.append(f"{v:.10g}\t{p:.10g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TailFit:
    """Power-law tail exponent from CCDF regression, with a Hill cross-check."""

    zeta: float
    zeta_err: float
    tail_fraction: float
    method: str
    r2: float
    hill_zeta: float
    hill_zeta_err: float

    def __post_init__(self):
        if self.zeta <= 0:
            raise ValueError("tail exponent must be positive")

    @property
    def power_law_like(self) -> bool:
        return self.r2 >= POWER_LAW_R2


def _require_normalized(values: np.ndarray):
    mean = float(np.mean(values))
    var = float(np.mean(values**2)) - mean**2
    if abs(mean) > NORMALIZATION_TOL or abs(var - 1.0) > NORMALIZATION_TOL:
        raise ValueError(
            f"input must be normalized (mean {mean:.2e}, variance {var:.6f}); "
            "apply series.normalize first")


def autocorrelation(x: ReturnSeries, max_lag: int, include_zero: bool = False) -> AcfResult:
    """c(s) = (1/(N-s)) sum_{i=1}^{N-s} x_i x_{i+s} for s = 1..max_lag.

    Requires a normalized series (zero mean, unit population variance),
    which makes c(0) = 1 when ``include_zero`` is set. Uncorrelated input
    gives |c(s)| of order 1/sqrt(N); exponential decay marks short-range and
    power-law decay long-range correlation.
    """
    v = x.values if isinstance(x, ReturnSeries) else np.asarray(x, dtype=float)
    n = len(v)
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if max_lag > n // 4:
        raise ValueError(f"max_lag {max_lag} exceeds N/4 = {n // 4}")
    _require_normalized(v)
    start = 0 if include_zero else 1
    lags = np.arange(start, max_lag + 1)
    c = np.array([float(v[: n - s] @ v[s:]) / (n - s) for s in lags])
    return AcfResult(lags, c)


def empirical_ccdf(x: ReturnSeries) -> Ccdf:
    """CCDF of absolute values: k-th largest |r| maps to probability k/N.

    Intended for normalized returns (the tail exponent then refers to the
    distribution in units of the standard deviation).
    """
    v = x.values if isinstance(x, ReturnSeries) else np.asarray(x, dtype=float)
    n = len(v)
    if n < 10:
        raise ValueError("need at least 10 values for a CCDF")
    mags = np.sort(np.abs(v))[::-1]
    probs = np.arange(1, n + 1) / n
    return Ccdf(mags, probs)


def tail_exponent(ccdf: Ccdf, tail_fraction: float = 0.05) -> TailFit:
    """OLS slope of log probability on log value over the largest values.

    zeta is minus the slope; the same points feed a Hill estimator reported
    alongside (hill_zeta, asymptotic error hill_zeta/sqrt(k)). Low r2 marks
    distributions without a power-law tail.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must be in (0, 1]")
    n = len(ccdf)
    k = int(math.floor(tail_fraction * n))
    if k < 20:
        raise ValueError(f"only {k} tail points at fraction {tail_fraction}; need >= 20")
    values = ccdf.values[:k]
    probs = ccdf.probs[:k]
    if np.any(values <= 0):
        raise ValueError("non-positive values in the selected tail")

    lx = np.log(values)
    ly = np.log(probs)
    xm = lx - lx.mean()
    sxx = float(xm @ xm)
    if sxx == 0.0:
        raise ValueError("degenerate tail: all selected values equal")
    slope = float(xm @ ly) / sxx
    resid = ly - (slope * lx + (ly.mean() - slope * lx.mean()))
    ssr = float(resid @ resid)
    sst = float(np.sum((ly - ly.mean()) ** 2))
    stderr = math.sqrt(ssr / (k - 2) / sxx) if k > 2 else 0.0
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0

    threshold = ccdf.values[k] if k < n else values[-1]
    if threshold <= 0:
        raise ValueError("non-positive tail threshold")
    hill = float(np.mean(np.log(values / threshold)))
    hill_zeta = 1.0 / hill if hill > 0 else math.inf
    hill_err = hill_zeta / math.sqrt(k) if math.isfinite(hill_zeta) else math.inf

    return TailFit(
        zeta=-slope,
        zeta_err=stderr,
        tail_fraction=tail_fraction,
        method="ccdf-ols",
        r2=r2,
        hill_zeta=hill_zeta,
        hill_zeta_err=hill_err,
    )
