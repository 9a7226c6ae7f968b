"""Rank-based tests used to compare solver configurations.

Distribution tails come from scipy; the statistics themselves, including the
exact small-sample Wilcoxon enumeration, are computed here so the tie handling
is explicit.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np
from scipy.stats import chi2, norm, rankdata

EXACT_MAX = 12  # exact rank-sum distribution up to this combined size
_EPS = 1e-9


def _sample(values, name="sample") -> np.ndarray:
    a = np.asarray(values, dtype=float).ravel()
    if a.size == 0:
        raise ValueError(f"{name} is empty")
    return a


def median(values: Sequence[float]) -> float:
    return float(np.median(_sample(values)))


def _tie_term(ranked: np.ndarray) -> float:
    _, counts = np.unique(ranked, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided rank-sum p-value for a location shift between ``a`` and ``b``.

    Exact over all labelings of the mid-ranks when the pooled size is at most
    12, otherwise the normal approximation with tie and continuity corrections.
    """
    x = _sample(a, "first sample")
    y = _sample(b, "second sample")
    n1, n2 = x.size, y.size
    n = n1 + n2
    ranks = rankdata(np.concatenate([x, y]))
    w = ranks[:n1].sum()
    mu = n1 * (n + 1) / 2.0
    dev = abs(w - mu)
    if n <= EXACT_MAX:
        total = 0
        extreme = 0
        for idx in itertools.combinations(range(n), n1):
            total += 1
            if abs(ranks[list(idx)].sum() - mu) >= dev - _EPS:
                extreme += 1
        return min(1.0, extreme / total)
    var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(ranks) / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = max(0.0, dev - 0.5) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided signed-rank p-value for paired samples; zero differences are dropped.

    Exact enumeration of the sign patterns up to 12 non-zero pairs, normal
    approximation with tie and continuity corrections beyond.
    """
    x = _sample(a, "first sample")
    y = _sample(b, "second sample")
    if x.size != y.size:
        raise ValueError("paired samples differ in length")
    d = x - y
    d = d[d != 0]
    n = d.size
    if n == 0:
        return 1.0
    ranks = rankdata(np.abs(d))
    w = ranks[d > 0].sum()
    mu = ranks.sum() / 2.0
    dev = abs(w - mu)
    if n <= EXACT_MAX:
        extreme = 0
        for signs in itertools.product((0, 1), repeat=n):
            if abs(float(np.dot(signs, ranks)) - mu) >= dev - _EPS:
                extreme += 1
        return min(1.0, extreme / 2.0 ** n)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - _tie_term(ranks) / 48.0
    if var <= 0:
        return 1.0
    z = max(0.0, dev - 0.5) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


def kruskal_wallis_h(groups: Sequence[Sequence[float]]) -> float:
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    arrs = [_sample(g, f"group {i}") for i, g in enumerate(groups)]
    pooled = np.concatenate(arrs)
    n = pooled.size
    ranks = rankdata(pooled)
    h = 0.0
    start = 0
    for g in arrs:
        r = ranks[start:start + g.size]
        h += r.sum() ** 2 / g.size
        start += g.size
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    c = 1.0 - _tie_term(ranks) / (n ** 3 - n)
    if c <= 0:
        return 0.0
    return max(0.0, h / c)


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> float:
    """p-value of the tie-corrected H statistic against chi-square with k - 1 df."""
    h = kruskal_wallis_h(groups)
    if h == 0.0:
        return 1.0
    return float(chi2.sf(h, len(groups) - 1))


def friedman_statistic(blocked) -> float:
    m = np.asarray(blocked, dtype=float)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise ValueError(f"need at least 2 rows and 2 columns, got shape {m.shape}")
    b, k = m.shape
    r = np.apply_along_axis(rankdata, 1, m)
    col = r.sum(axis=0)
    a1 = float(np.sum(r ** 2))
    c1 = b * k * (k + 1) ** 2 / 4.0
    denom = a1 - c1
    if denom <= _EPS:
        return 0.0
    return float((k - 1) * np.sum((col - b * (k + 1) / 2.0) ** 2) / denom)


def friedman(blocked) -> float:
    """Friedman test over within-row mid-ranks; rows are blocks, columns treatments."""
    q = friedman_statistic(blocked)
    if q == 0.0:
        return 1.0
    return float(chi2.sf(q, np.asarray(blocked).shape[1] - 1))


def benjamini_hochberg(pvals: Sequence[float], q: float) -> list[bool]:
    """Step-up FDR control; reject flags come back in input order."""
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    p = np.asarray(pvals, dtype=float)
    if p.size == 0:
        return []
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    below = p[order] <= q * np.arange(1, m + 1) / m + 1e-12
    flags = np.zeros(m, dtype=bool)
    if below.any():
        last = int(np.nonzero(below)[0].max())
        flags[order[:last + 1]] = True
    return flags.tolist()
