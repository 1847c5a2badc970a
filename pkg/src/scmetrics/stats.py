"""Descriptive statistics and histograms for one metric column."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence

import numpy as np

__all__ = ["SummaryStatistics", "Histogram", "summarize", "quantile", "histogram"]

# Upper bound on automatically chosen bin counts; a tiny IQR next to a huge
# range would otherwise ask for millions of bins.
MAX_AUTO_BINS = 1000


@dataclass(frozen=True)
class SummaryStatistics:
    n: int
    mean: float
    median: float
    std: float
    max: float
    min: float
    iqr: float
    p10: float
    p90: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def quantile(sorted_x: np.ndarray, p: float) -> float:
    """Linear interpolation between order statistics at rank (n-1)p + 1."""
    h = (len(sorted_x) - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, len(sorted_x) - 1)
    return float(sorted_x[lo] + (h - lo) * (sorted_x[hi] - sorted_x[lo]))


def summarize(samples: Sequence[float]) -> SummaryStatistics:
    """Mean, median, sample std, extremes, IQR and the 10th/90th percentiles.

    Raises ValueError for fewer than two samples.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size < 2:
        raise ValueError("at least two samples are needed for a summary")
    q1, q3 = quantile(x, 0.25), quantile(x, 0.75)
    return SummaryStatistics(
        n=int(x.size),
        mean=float(x.mean()),
        median=quantile(x, 0.5),
        std=float(x.std(ddof=1)),
        max=float(x[-1]),
        min=float(x[0]),
        iqr=q3 - q1,
        p10=quantile(x, 0.10),
        p90=quantile(x, 0.90),
    )


def histogram(samples: Sequence[float], bins: Optional[int] = None) -> Histogram:
    """Equal-width histogram over [min, max], last bin closed on the right.

    Without ``bins`` the width follows the Freedman-Diaconis rule, rounded up
    to a whole number for integer-valued data. When the IQR is zero the rule
    gives no width, so Sturges' bin count is used instead (width 1 for
    integers). Automatic binning never exceeds ``MAX_AUTO_BINS`` bins.
    Constant data gets a single unit-width bin centred on the value.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 1:
        raise ValueError("histogram of an empty sample")
    if bins is not None and bins < 1:
        raise ValueError("bins must be positive")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        edges = np.array([lo - 0.5, lo + 0.5])
        return Histogram(edges, np.array([x.size]))

    integer_valued = bool(np.all(x == np.round(x)))
    if bins is not None:
        edges = np.linspace(lo, hi, bins + 1)
    else:
        xs = np.sort(x)
        width = 2.0 * (quantile(xs, 0.75) - quantile(xs, 0.25)) * x.size ** (-1.0 / 3.0)
        if integer_valued:
            width = max(1.0, math.ceil(width), math.ceil((hi - lo) / MAX_AUTO_BINS))
            k = max(1, math.ceil((hi - lo) / width))
            edges = lo + width * np.arange(k + 1)
        else:
            if width > 0:
                k = max(1, math.ceil((hi - lo) / width))
            else:
                k = math.ceil(math.log2(x.size)) + 1
            k = min(k, MAX_AUTO_BINS)
            edges = np.linspace(lo, hi, k + 1)
    counts, _ = np.histogram(x, bins=edges)
    return Histogram(edges, counts)
