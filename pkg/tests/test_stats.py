import itertools

import numpy as np
import pytest
from scipy import stats as ss

from cbctt.stats import (benjamini_hochberg, friedman, friedman_statistic, kruskal_wallis,
                         kruskal_wallis_h, median, wilcoxon_rank_sum, wilcoxon_signed_rank)


def test_median():
    assert median([1, 2, 3]) == 2
    assert median([1, 2, 3, 4]) == 2.5
    assert median([7, 7, 7, 7]) == 7
    with pytest.raises(ValueError):
        median([])


def _enumerated_p(a, b):
    # two-sided exact p by listing every relabeling of the pooled sample
    pooled = ss.rankdata(np.concatenate([a, b]))
    n = len(pooled)
    mu = len(a) * (n + 1) / 2
    obs = abs(pooled[: len(a)].sum() - mu)
    sums = [pooled[list(c)].sum() for c in itertools.combinations(range(n), len(a))]
    return np.mean([abs(s - mu) >= obs - 1e-9 for s in sums])


def test_rank_sum_reference():
    assert wilcoxon_rank_sum([1, 2, 3], [4, 5, 6]) == pytest.approx(0.1, abs=1e-12)
    assert wilcoxon_rank_sum([1, 2, 3], [1, 2, 3]) == 1.0


def test_rank_sum_exact_matches_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(30):
        na, nb = rng.integers(1, 7, size=2)
        a = rng.integers(0, 6, size=na).astype(float)
        b = rng.integers(0, 6, size=nb).astype(float)
        assert wilcoxon_rank_sum(a, b) == pytest.approx(_enumerated_p(a, b), abs=1e-12)


def test_rank_sum_exact_matches_scipy_without_ties():
    rng = np.random.default_rng(2)
    for _ in range(20):
        perm = rng.permutation(12) + 0.0
        a, b = perm[:5], perm[5:]
        want = ss.mannwhitneyu(a, b, alternative="two-sided", method="exact").pvalue
        assert wilcoxon_rank_sum(a, b) == pytest.approx(want, abs=1e-12)


def test_rank_sum_normal_branch():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 10, size=15)
    b = rng.integers(2, 12, size=14)
    want = ss.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic",
                           use_continuity=True).pvalue
    assert wilcoxon_rank_sum(a, b) == pytest.approx(want, rel=1e-9)
    lo, hi = rng.uniform(0, 1, 30), rng.uniform(10, 11, 30)
    assert wilcoxon_rank_sum(lo, hi) < 1e-6


def test_signed_rank():
    a = [10, 11, 12, 13, 14, 15, 16, 17]
    assert wilcoxon_signed_rank(a, [x + 1 for x in a]) == pytest.approx(2 / 2**8)
    assert wilcoxon_signed_rank(a, a) == 1.0
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=25), rng.normal(0.5, size=25)
    want = ss.wilcoxon(x, y, correction=True, method="approx").pvalue
    assert wilcoxon_signed_rank(x, y) == pytest.approx(want, rel=1e-9)
    x, y = rng.normal(size=9), rng.normal(size=9)
    want = ss.wilcoxon(x, y, method="exact").pvalue
    assert wilcoxon_signed_rank(x, y) == pytest.approx(want, rel=1e-9)


def test_kruskal_wallis():
    assert kruskal_wallis_h([[4, 4, 4], [4, 4], [4, 4, 4, 4]]) == 0.0
    assert kruskal_wallis([[4, 4, 4], [4, 4]]) == 1.0
    groups = [np.arange(10) + 0.0, np.arange(10) + 20.0, np.arange(10) + 40.0]
    # disjoint ascending blocks: rank sums 55, 155, 255 over N = 30
    h = 12 / (30 * 31) * (55**2 + 155**2 + 255**2) / 10 - 3 * 31
    assert kruskal_wallis_h(groups) == pytest.approx(h)
    assert kruskal_wallis(groups) < 1e-3
    rng = np.random.default_rng(5)
    g = [rng.integers(0, 8, size=n) for n in (7, 9, 12)]
    assert kruskal_wallis(g) == pytest.approx(ss.kruskal(*g).pvalue, rel=1e-9)
    with pytest.raises(ValueError):
        kruskal_wallis([[1, 2]])


def test_kruskal_two_groups_agrees_with_rank_sum():
    rng = np.random.default_rng(6)
    for _ in range(10):
        a, b = rng.normal(size=20), rng.normal(0.3, size=20)
        assert abs(kruskal_wallis([a, b]) - wilcoxon_rank_sum(a, b)) <= 0.02


def test_friedman():
    same = np.tile(np.arange(5.0)[:, None], (1, 3))
    assert friedman_statistic(same) == 0.0 and friedman(same) == 1.0
    rng = np.random.default_rng(7)
    base = rng.normal(size=(15, 2))
    dominated = np.column_stack([base, base.max(axis=1) + 1])
    assert friedman(dominated) < 0.05
    m = rng.integers(0, 4, size=(12, 4)).astype(float)
    assert friedman(m) == pytest.approx(ss.friedmanchisquare(*m.T).pvalue, rel=1e-9)
    assert friedman(m) == pytest.approx(friedman(m[:, [2, 0, 3, 1]]), abs=1e-15)
    with pytest.raises(ValueError):
        friedman(np.ones((1, 3)))


def test_benjamini_hochberg():
    assert benjamini_hochberg([0.01, 0.02, 0.04, 0.20], 0.10) == [True, True, True, False]
    assert benjamini_hochberg([0.04, 0.20, 0.01, 0.02], 0.10) == [True, False, True, True]
    assert benjamini_hochberg([1.0] * 5, 0.1) == [False] * 5
    assert benjamini_hochberg([0.0] * 5, 0.1) == [True] * 5
    # step-up: a larger p admitted under its line drags smaller ones in
    assert benjamini_hochberg([0.06, 0.07], 0.10) == [True, True]
    for bad in ([1.2], [-0.1]):
        with pytest.raises(ValueError):
            benjamini_hochberg(bad, 0.1)
    with pytest.raises(ValueError):
        benjamini_hochberg([0.5], 1.0)


def test_bh_monotone_in_q():
    rng = np.random.default_rng(8)
    for _ in range(50):
        p = rng.uniform(0, 0.3, size=10)
        r1, r2 = benjamini_hochberg(p, 0.05), benjamini_hochberg(p, 0.2)
        assert all(b for a, b in zip(r1, r2) if a)


def test_rank_invariance_and_symmetry():
    rng = np.random.default_rng(9)
    a, b = rng.integers(0, 20, size=8), rng.integers(3, 25, size=9)
    f = lambda v: 2 * np.asarray(v) + 1  # noqa: E731
    assert wilcoxon_rank_sum(a, b) == wilcoxon_rank_sum(f(a), f(b))
    assert wilcoxon_rank_sum(a, b) == wilcoxon_rank_sum(b, a)
    assert kruskal_wallis([a, b]) == kruskal_wallis([f(a), f(b)])
    m = rng.normal(size=(6, 3))
    assert friedman(m) == friedman(f(m))
    a, b = rng.normal(size=6), rng.normal(size=6)
    assert wilcoxon_rank_sum(a, b) == wilcoxon_rank_sum(f(a), f(b))
    assert wilcoxon_signed_rank(a, b) == wilcoxon_signed_rank(b, a)


def test_empty_samples_rejected():
    with pytest.raises(ValueError):
        wilcoxon_rank_sum([], [1.0])
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([1.0, 2.0], [1.0])
