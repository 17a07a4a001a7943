"""Price/return series containers and basic transformations.

Everything here is immutable after construction and pure, so values can be
shared freely between threads.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "AnalysisPeriod",
    "load_price_csv",
    "log_returns",
    "prices_from_returns",
    "normalize",
    "slice_period",
    "window_extrema",
]


def _as_dates(timestamps) -> np.ndarray:
    out = np.asarray(timestamps, dtype="datetime64[D]")
    out.setflags(write=False)
    return out


def _as_floats(values) -> np.ndarray:
    out = np.asarray(values, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PriceSeries:
    """Dated positive price observations."""

    timestamps: np.ndarray
    prices: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "timestamps", _as_dates(self.timestamps))
        object.__setattr__(self, "prices", _as_floats(self.prices))
        if len(self.prices) != len(self.timestamps):
            raise ValueError("timestamps and prices must have equal length")
        if len(self.prices) < 2:
            raise ValueError("price series needs at least 2 observations")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise ValueError("prices must be finite and positive")
        if np.any(np.diff(self.timestamps) <= np.timedelta64(0, "D")):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSeries:
    """Log-return values; timestamps are the later day of each return pair."""

    values: np.ndarray
    timestamps: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _as_floats(self.values))
        object.__setattr__(self, "timestamps", _as_dates(self.timestamps))
        if len(self.values) != len(self.timestamps):
            raise ValueError("values and timestamps must have equal length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("return values must be finite")

    def __len__(self) -> int:
        return len(self.values)

    def with_values(self, values) -> "ReturnSeries":
        """Same timestamps/label, new values (e.g. permuted or rescaled)."""
        return ReturnSeries(values, self.timestamps, self.label)


@dataclass(frozen=True)
class AnalysisPeriod:
    """Inclusive date window, e.g. the 2010 to mid-2013 market section."""

    start: np.datetime64
    end: np.datetime64
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "start", np.datetime64(self.start, "D"))
        object.__setattr__(self, "end", np.datetime64(self.end, "D"))
        if not self.start < self.end:
            raise ValueError(f"period start {self.start} must precede end {self.end}")


def load_price_csv(source, label: str = "") -> PriceSeries:
    """Parse a ``date,price`` CSV (ISO-8601 dates, decimal prices).

    ``source`` may be a path, bytes, or a file object (binary or text).
    Accepts LF or CRLF line endings. Raises ValueError with the offending
    line number for malformed rows, non-positive prices or out-of-order dates.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    rows = [(i + 1, r) for i, r in enumerate(rows) if r]  # keep 1-based line numbers
    if not rows:
        raise ValueError("empty CSV input")
    header_line, header = rows[0]
    if [c.strip().lower() for c in header] != ["date", "price"]:
        raise ValueError(f"line {header_line}: expected header 'date,price', got {','.join(header)!r}")

    dates, prices = [], []
    for line, row in rows[1:]:
        if len(row) != 2:
            raise ValueError(f"line {line}: expected 2 columns, got {len(row)}")
        try:
            d = np.datetime64(_parse_iso_date(row[0].strip()), "D")
        except ValueError as exc:
            raise ValueError(f"line {line}: bad date {row[0]!r}: {exc}") from None
        try:
            p = float(row[1])
        except ValueError:
            raise ValueError(f"line {line}: bad price {row[1]!r}") from None
        if not math.isfinite(p) or p <= 0:
            raise ValueError(f"line {line}: non-positive price {row[1]!r}")
        if dates and d <= dates[-1]:
            raise ValueError(f"line {line}: non-increasing date {row[0]!r}")
        dates.append(d)
        prices.append(p)

    if len(prices) < 2:
        raise ValueError("need at least 2 data rows")
    return PriceSeries(np.array(dates, dtype="datetime64[D]"), prices, label)


def _parse_iso_date(token: str) -> str:
    # strict YYYY-MM-DD; np.datetime64 alone would accept partial dates
    parts = token.split("-")
    if len(parts) != 3 or [len(p) for p in parts] != [4, 2, 2] or not all(p.isdigit() for p in parts):
        raise ValueError("expected YYYY-MM-DD")
    y, m, d = map(int, parts)
    if not (1 <= m <= 12 and 1 <= d <= 31):
        raise ValueError("month/day out of range")
    return token


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8-sig")
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8-sig") if isinstance(data, bytes) else data
    raise TypeError(f"cannot read CSV from {type(source).__name__}")


def log_returns(p: PriceSeries) -> ReturnSeries:
    """Log differences of consecutive prices; output is one element shorter."""
    values = np.diff(np.log(p.prices))
    return ReturnSeries(values, p.timestamps[1:], p.label)


def prices_from_returns(r: ReturnSeries, initial_price: float = 1.0,
                        initial_date=None) -> PriceSeries:
    """Cumulative exponentiation, the inverse of :func:`log_returns`.

    The initial observation is anchored one day before the first return
    unless ``initial_date`` is given.
    """
    if initial_price <= 0:
        raise ValueError("initial_price must be positive")
    if initial_date is None:
        initial_date = r.timestamps[0] - np.timedelta64(1, "D")
    csum = np.cumsum(r.values)
    if csum.size and np.max(np.abs(csum)) > 700:
        raise ValueError("cumulative return exceeds exp() range; rescale the series")
    prices = initial_price * np.exp(np.concatenate(([0.0], csum)))
    dates = np.concatenate(([np.datetime64(initial_date, "D")], r.timestamps))
    return PriceSeries(dates, prices, r.label)


def normalize(r: ReturnSeries) -> ReturnSeries:
    """Shift/scale to zero mean and unit variance (population denominator N)."""
    if len(r) < 2:
        raise ValueError("need at least 2 values to normalize")
    sd = float(np.std(r.values))
    if sd == 0.0:
        raise ValueError("zero-variance series cannot be normalized")
    return r.with_values((r.values - np.mean(r.values)) / sd)


def slice_period(r: ReturnSeries, p: AnalysisPeriod) -> ReturnSeries:
    """Contiguous subseries with timestamps inside [p.start, p.end]."""
    lo = np.searchsorted(r.timestamps, p.start, side="left")
    hi = np.searchsorted(r.timestamps, p.end, side="right")
    if lo >= hi:
        raise ValueError(f"period {p.name or p.start} does not overlap the series")
    return ReturnSeries(r.values[lo:hi], r.timestamps[lo:hi], r.label)


def window_extrema(r: ReturnSeries, R: int, mode: str = "max") -> ReturnSeries:
    """Extremum of each non-overlapping length-R window.

    The trailing partial window is discarded, so the output has floor(N/R)
    points. Ties within a window resolve to the earliest element.
    """
    if R < 1:
        raise ValueError("window length R must be >= 1")
    n = len(r) // R
    if n < 1:
        raise ValueError(f"series of length {len(r)} is shorter than one window (R={R})")
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    blocks = r.values[: n * R].reshape(n, R)
    pick = np.argmax(blocks, axis=1) if mode == "max" else np.argmin(blocks, axis=1)
    idx = np.arange(n) * R + pick
    return ReturnSeries(r.values[idx], r.timestamps[idx], r.label)
