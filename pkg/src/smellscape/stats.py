"""Correlation, z-score and entropy kernels shared by the metric modules.

Standard deviations are population (``ddof=0``) throughout; entropies are in
bits.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import LengthMismatch, NotADistribution, StatsError, TooFewPoints, ZeroVariance

__all__ = ["as_series", "pearson", "spearman", "zscore", "zscores",
           "shannon_entropy", "permutation_test"]


def as_series(values, name="series") -> np.ndarray:
    """1-D float array with no NaN/inf."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise StatsError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise StatsError(f"{name} contains non-finite values")
    return arr


def _pair(x, y):
    x, y = as_series(x, "x"), as_series(y, "y")
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 3:
        raise TooFewPoints(f"need at least 3 points, got {x.size}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ZeroVariance("constant input")
    return x, y


def _corr(x, y):
    dx = x - x.mean()
    dy = y - y.mean()
    den = np.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    if den == 0:
        raise ZeroVariance("constant input")
    return float(np.clip(np.dot(dx, dy) / den, -1.0, 1.0))


def pearson(x, y) -> float:
    """Product-moment correlation of two equal-length series.

    Raises
    ------
    LengthMismatch, TooFewPoints, ZeroVariance
    """
    return _corr(*_pair(x, y))


def spearman(x, y) -> float:
    """Pearson correlation of average-ranked values (ties share the mean rank)."""
    x, y = _pair(x, y)
    return _corr(rankdata(x, method="average"), rankdata(y, method="average"))


def zscore(value: float, population) -> float:
    pop = as_series(population, "population")
    sigma = pop.std()
    if pop.size == 0 or sigma == 0:
        raise ZeroVariance("population has zero standard deviation")
    return float((value - pop.mean()) / sigma)


def zscores(values, population) -> np.ndarray:
    pop = as_series(population, "population")
    sigma = pop.std()
    if pop.size == 0 or sigma == 0:
        raise ZeroVariance("population has zero standard deviation")
    return (np.asarray(values, dtype=float) - pop.mean()) / sigma


def shannon_entropy(p, tol: float = 1e-9) -> float:
    """Entropy in bits of a probability vector; ``0 log 0`` is taken as 0.

    Vectors summing to 1 within `tol` are renormalized before use.

    >>> shannon_entropy([0.5, 0.25, 0.25])
    1.5
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
        raise NotADistribution("expected a non-empty finite vector")
    if np.any(p < 0):
        raise NotADistribution("negative component")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise NotADistribution(f"components sum to {total!r}")
    p = p / total
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def permutation_test(x, y, statistic=pearson, n_resamples: int = 10_000,
                     seed: int = 0) -> float:
    """Two-sided permutation p-value for an association statistic.

    ``y`` is shuffled `n_resamples` times; the p-value is
    ``(1 + #{|stat_perm| >= |stat_obs|}) / (n_resamples + 1)``.
    """
    x, y = _pair(x, y)
    if statistic is spearman:
        x = rankdata(x, method="average")
        y = rankdata(y, method="average")
        statistic = pearson
    observed = abs(statistic(x, y))
    rng = np.random.default_rng(seed)
    if statistic is pearson:
        dx = x - x.mean()
        dx /= np.sqrt(np.dot(dx, dx))
        yc = y - y.mean()
        yc /= np.sqrt(np.dot(yc, yc))
        hits = 0
        chunk = max(1, 2_000_000 // x.size)
        done = 0
        while done < n_resamples:
            k = min(chunk, n_resamples - done)
            perms = rng.permuted(np.broadcast_to(yc, (k, yc.size)), axis=1)
            r = np.abs(perms @ dx)
            hits += int(np.count_nonzero(r >= observed - 1e-12))
            done += k
    else:
        hits = sum(abs(statistic(x, rng.permutation(y))) >= observed - 1e-12
                   for _ in range(n_resamples))
    return (1 + hits) / (n_resamples + 1)
