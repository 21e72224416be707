"""Nonparametric comparison tests: Wilcoxon signed-rank, Friedman, Nemenyi CD."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import chi2, norm, rankdata

ALPHA = 0.05

# Two-tailed Nemenyi critical values q_alpha for k = 2..10 (studentized range
# statistic divided by sqrt(2), infinite degrees of freedom), as tabulated in
# Demsar, "Statistical Comparisons of Classifiers over Multiple Data Sets",
# JMLR 7 (2006), Table 5.
NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589, 7: 2.693, 8: 2.780, 9: 2.855, 10: 2.920},
}

EXACT_LIMIT = 25


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    statistic: float
    p_value: float
    method: str
    n: int = 0
    exact: bool = False

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    mean_ranks: tuple[float, ...]
    n_datasets: int
    k_algorithms: int

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA


@lru_cache(maxsize=None)
def _signed_rank_counts(n: int) -> tuple[int, ...]:
    """Number of sign assignments of ranks 1..n for each positive-rank sum."""
    counts = [1] + [0] * (n * (n + 1) // 2)
    for r in range(1, n + 1):
        for s in range(len(counts) - 1, r - 1, -1):
            counts[s] += counts[s - r]
    return tuple(counts)


def wilcoxon_exact_p(statistic: float, n: int) -> float:
    """Two-sided exact p-value of T = min(W+, W-) under the untied null."""
    counts = _signed_rank_counts(n)
    below = sum(counts[: int(math.floor(statistic + 1e-9)) + 1])
    return min(1.0, 2.0 * below / 2 ** n)


def wilcoxon_signed_rank(pairs: Sequence[tuple[float, float]] | np.ndarray, decimals: int = 9) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped and tied absolute differences share average
    ranks. The statistic is ``min(W+, W-)``. The exact null distribution is
    used when ``n <= 25`` and no zero differences were dropped; otherwise the
    p-value comes from the normal approximation with the tie-corrected
    variance and no continuity correction. Differences are rounded to
    ``decimals`` places so tabulated values that tie on paper also tie here.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise StatsError("expected a sequence of (x, y) pairs")
    d = np.round(arr[:, 0] - arr[:, 1], decimals)
    n_zero = int((d == 0).sum())
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise StatsError("all differences are zero")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    t = min(w_plus, w_minus)
    if n <= EXACT_LIMIT and n_zero == 0:
        return TestResult(t, wilcoxon_exact_p(t, n), "wilcoxon", n, exact=True)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - (tie_counts ** 3 - tie_counts).sum() / 48.0
    z = (t - mean) / math.sqrt(var)
    p = min(1.0, 2.0 * norm.cdf(-abs(z)))
    return TestResult(t, float(p), "wilcoxon", n, exact=False)


def friedman(values) -> FriedmanResult:
    """Tie-corrected Friedman chi-square; rows are datasets, columns methods.

    Within a row, larger values get larger ranks.
    """
    M = np.asarray(values, dtype=float)
    if M.ndim != 2 or M.shape[0] < 2 or M.shape[1] < 2:
        raise StatsError("need at least 2 datasets and 2 methods")
    N, k = M.shape
    R = np.vstack([rankdata(row) for row in M])
    col = R.sum(axis=0)
    chi = 12.0 / (N * k * (k + 1)) * (col ** 2).sum() - 3.0 * N * (k + 1)
    ties = 0.0
    for row in R:
        _, t = np.unique(row, return_counts=True)
        ties += (t ** 3 - t).sum()
    correction = 1.0 - ties / (N * (k ** 3 - k))
    if correction <= 0:
        raise StatsError("every row is fully tied")
    stat = max(chi / correction, 0.0)
    p = float(chi2.sf(stat, k - 1))
    return FriedmanResult(float(stat), p, tuple(float(v) for v in col / N), N, k)


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference of mean ranks for k methods over n datasets."""
    if alpha not in NEMENYI_Q:
        raise StatsError(f"alpha must be one of {sorted(NEMENYI_Q)}")
    table = NEMENYI_Q[alpha]
    if k not in table:
        raise StatsError(f"k={k} outside the tabulated range 2..10")
    if n < 2:
        raise StatsError("need at least 2 datasets")
    return table[k] * math.sqrt(k * (k + 1) / (6.0 * n))


def nemenyi_pairs(names: Sequence[str], mean_ranks: Sequence[float], cd: float) -> list[tuple[str, str, float, bool]]:
    """(a, b, |rank gap|, significant) for every pair of methods."""
    out = []
    for (a, ra), (b, rb) in combinations(zip(names, mean_ranks), 2):
        gap = abs(ra - rb)
        out.append((a, b, gap, gap > cd))
    return out
