"""Empirical CCDFs and heavy-tail model fits.

Two models are fitted: a continuous power law above a lower cutoff ``x0``
(chosen by scanning candidate cutoffs for the smallest KS distance), and a
lognormal over the positive part of the sample. All fitting happens in linear
scale; log-log coordinates only enter through the R-squared diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

__all__ = [
    "FitError",
    "EmpiricalCCDF",
    "PowerLawFit",
    "LogNormalFit",
    "empirical_ccdf",
    "ks_statistic",
    "fit_powerlaw",
    "fit_lognormal",
    "r_squared_loglog",
    "powerlaw_ccdf",
    "lognormal_ccdf",
    "lognormal_cdf",
]


class FitError(ValueError):
    """Model preconditions are not met by the data."""


@dataclass(frozen=True)
class EmpiricalCCDF:
    """Distinct sample values ``x`` (ascending) with ``g = P(X >= x)``.

    ``counts[i]`` is the number of samples at or above ``x[i]``, so
    ``g == counts / n`` exactly.
    """

    x: np.ndarray
    g: np.ndarray
    counts: np.ndarray
    n: int

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.g.tolist()))

    def loglog(self) -> tuple[np.ndarray, np.ndarray]:
        """Points usable on log-log axes (``x > 0``)."""
        keep = self.x > 0
        return self.x[keep], self.g[keep]


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    x0: float
    n_tail: int
    ks_d: float
    n: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def ccdf(self, x) -> np.ndarray:
        """Model CCDF over the whole sample; zero below the cutoff."""
        return powerlaw_ccdf(x, self.alpha, self.x0, self.n_tail / self.n if self.n else 1.0)


@dataclass(frozen=True)
class LogNormalFit:
    mu: float
    sigma: float
    n_used: int
    dropped_nonpositive: int
    ks_d: float
    r2_loglog: float

    def as_dict(self) -> dict:
        return asdict(self)

    def ccdf(self, x) -> np.ndarray:
        return lognormal_ccdf(x, self.mu, self.sigma)


def empirical_ccdf(samples: Sequence[float]) -> EmpiricalCCDF:
    """Empirical CCDF over the distinct values of ``samples``.

    >>> empirical_ccdf([1, 2, 3, 4]).points
    [(1.0, 1.0), (2.0, 0.75), (3.0, 0.5), (4.0, 0.25)]
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empirical CCDF of an empty sample")
    values, multiplicity = np.unique(x, return_counts=True)
    at_or_above = x.size - np.concatenate(([0], np.cumsum(multiplicity)[:-1]))
    return EmpiricalCCDF(values, at_or_above / x.size, at_or_above, int(x.size))


def ks_statistic(samples: Sequence[float], model_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov-Smirnov distance between the sample and a model CDF.

    At every distinct sample value the empirical CDF is compared with the model
    both at the value and just before it. The model's left limit is taken one
    ulp below the value, which changes nothing for continuous models and keeps
    step-function models (e.g. another empirical CDF) exact.

    >>> ks_statistic([0.5], lambda v: v)
    0.5
    """
    x = np.asarray(samples, dtype=float)
    values, multiplicity = np.unique(x, return_counts=True)
    below_or_at = np.cumsum(multiplicity)
    upper = below_or_at / x.size
    lower = (below_or_at - multiplicity) / x.size
    f = np.asarray(model_cdf(values), dtype=float)
    f_left = np.asarray(model_cdf(np.nextafter(values, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(lower - f_left))))


# ---------------------------------------------------------------------------
# power law

def powerlaw_ccdf(x, alpha: float, x0: float, tail_fraction: float = 1.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    above = x >= x0
    out[above] = tail_fraction * (x[above] / x0) ** (1.0 - alpha)
    return out


def fit_powerlaw(samples: Sequence[float], n_min: int = 10) -> PowerLawFit:
    """Continuous power-law tail fit with KS-driven cutoff selection.

    Every distinct positive value with at least ``n_min`` samples at or above
    it is tried as the cutoff ``x0``. For each, the exponent is the maximum
    likelihood estimate ``1 + m / sum(ln(x_i / x0))`` over the ``m`` tail
    samples, and the KS distance is measured on the tail alone. The cutoff
    with the smallest distance wins; ties go to the smaller cutoff.

    Raises:
        FitError: fewer than ``n_min`` positive samples, or no cutoff leaves a
            tail with more than one distinct value.
    """
    x = np.asarray(samples, dtype=float)
    pos = np.sort(x[x > 0])
    if pos.size < n_min or pos.size == 0:
        raise FitError(f"power law needs at least {n_min} positive samples, got {pos.size}")

    values, first = np.unique(pos, return_index=True)
    m_total = pos.size

    best = None
    for x0, i in zip(values.tolist(), first.tolist()):
        m = m_total - i
        if m < n_min:
            break
        tail = pos[i:]
        if tail[-1] == tail[0]:
            continue
        log_sum = float(np.sum(np.log(tail / x0)))
        alpha = 1.0 + m / log_sum
        d = _tail_ks(tail, alpha, x0)
        if best is None or d < best[0]:
            best = (d, alpha, x0, m)

    if best is None:
        raise FitError("no cutoff leaves a non-degenerate tail")
    d, alpha, x0, m = best
    return PowerLawFit(alpha=float(alpha), x0=float(x0), n_tail=int(m), ks_d=float(d),
                       n=int(x.size))


def _tail_ks(tail: np.ndarray, alpha: float, x0: float) -> float:
    # Same statistic as ks_statistic, specialised to a sorted tail.
    m = tail.size
    last = np.ones(m, dtype=bool)
    last[:-1] = tail[1:] != tail[:-1]
    firsts = np.ones(m, dtype=bool)
    firsts[1:] = tail[1:] != tail[:-1]
    idx = np.arange(m)
    upper = (idx[last] + 1) / m
    lower = idx[firsts] / m
    f = 1.0 - (tail[last] / x0) ** (1.0 - alpha)
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(lower - f))))


# ---------------------------------------------------------------------------
# lognormal

def lognormal_cdf(x, mu: float, sigma: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = ndtr((np.log(x[pos]) - mu) / sigma)
    return out


def lognormal_ccdf(x, mu: float, sigma: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    pos = x > 0
    # ndtr(-z) keeps precision far in the upper tail, unlike 1 - ndtr(z)
    out[pos] = ndtr(-(np.log(x[pos]) - mu) / sigma)
    return out


def fit_lognormal(samples: Sequence[float]) -> LogNormalFit:
    """Maximum likelihood lognormal fit to the positive samples.

    ``mu`` and ``sigma`` are the mean and (population) standard deviation of
    ``ln x``. Non-positive samples are dropped and counted. The KS distance is
    taken over all positive samples; R-squared compares log10 CCDFs.

    >>> fit = fit_lognormal([math.e, math.e ** 3])
    >>> round(fit.mu, 12), round(fit.sigma, 12)
    (2.0, 1.0)
    """
    x = np.asarray(samples, dtype=float)
    pos = x[x > 0]
    if np.unique(pos).size < 2:
        raise FitError("lognormal needs at least two distinct positive samples")
    logs = np.log(pos)
    mu = float(logs.mean())
    sigma = float(np.sqrt(np.mean((logs - mu) ** 2)))
    d = ks_statistic(pos, lambda v: lognormal_cdf(v, mu, sigma))
    ccdf = empirical_ccdf(pos)
    try:
        r2 = r_squared_loglog(ccdf, lambda v: lognormal_ccdf(v, mu, sigma))
    except ValueError:
        r2 = float("nan")
    return LogNormalFit(mu=mu, sigma=sigma, n_used=int(pos.size),
                        dropped_nonpositive=int(x.size - pos.size), ks_d=d, r2_loglog=r2)


# ---------------------------------------------------------------------------
# goodness of fit in log-log space

def r_squared_loglog(ccdf: EmpiricalCCDF, model_g: Callable[[np.ndarray], np.ndarray]) -> float:
    """Coefficient of determination between log10 empirical and model CCDFs.

    Only points with ``x > 0`` and a positive model value take part.
    """
    x, g = ccdf.loglog()
    model = np.asarray(model_g(x), dtype=float)
    keep = model > 0
    if keep.sum() < 3:
        raise ValueError("need at least three points with x > 0 and positive model CCDF")
    ly = np.log10(g[keep])
    lm = np.log10(model[keep])
    total = np.sum((ly - ly.mean()) ** 2)
    if total == 0:
        raise ValueError("empirical log CCDF has zero variance")
    return float(1.0 - np.sum((ly - lm) ** 2) / total)
