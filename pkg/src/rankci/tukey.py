"""Rank confidence intervals from Tukey-style pairwise comparisons.

The production procedure is purely pairwise: standardize every observed
difference, compare against one studentized-range quantile, and count
rejections below/above each center to clip its rank interval.  The same
decision problem can be phrased as partition testing with a max-type
block statistic; that reformulation is exponential and exists to validate,
by paired runs, that the two procedures produce identical intervals when
all standard deviations are equal (a three-center counterexample in the
tests shows unequal deviations break the equivalence in both directions).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import GuardError, OrderedHypothesis, RankCIs
from .numerics import McConfig, studentized_range_quantile

__all__ = [
    "PairwiseDecision",
    "tukey_pairwise_decisions",
    "tukey_pairwise_cis",
    "tukey_partition_test",
    "tukey_partition_cis",
]

#: The partition-form enumeration walks 2**(n-1) hypotheses.
PARTITION_GUARD = 20


@dataclass(frozen=True)
class PairwiseDecision:
    """All pairwise standardized differences and their threshold decisions.

    ``statistic[i, j] = |y_i - y_j| / sqrt(sigma_i^2 + sigma_j^2)`` over the
    sorted centers, ``reject = statistic > q`` — symmetric with a False
    diagonal.
    """

    statistic: np.ndarray
    q: float
    reject: np.ndarray


def _resolve_q(sample, alpha, q, mc):
    if q is not None:
        return float(q)
    return studentized_range_quantile(
        sample.sigma, 1.0 - alpha, McConfig() if mc is None else mc
    )


def tukey_pairwise_decisions(sample, q):
    """Standardize every pairwise difference and compare against ``q``."""
    y = sample.y
    s2 = sample.sigma**2
    stat = np.abs(y[:, None] - y[None, :]) / np.sqrt(s2[:, None] + s2[None, :])
    np.fill_diagonal(stat, 0.0)
    reject = stat > q
    np.fill_diagonal(reject, False)
    return PairwiseDecision(stat, float(q), reject)


def tukey_pairwise_cis(sample, alpha=0.05, q=None, mc=None):
    """Rank CIs by counting pairwise rejections on each side of a center.

    A rejected pair against a strictly smaller observation raises the
    rank lower end by one; against a strictly larger observation it lowers
    the upper end by one.  With ``q=None`` the studentized-range quantile
    is estimated by Monte Carlo from the sample's standard deviations.
    """
    q = _resolve_q(sample, alpha, q, mc)
    decision = tukey_pairwise_decisions(sample, q)
    n = sample.n
    reject = decision.reject
    tri = np.tril(np.ones((n, n), dtype=bool), k=-1)
    lo = 1 + (reject & tri).sum(axis=1)
    hi = n - (reject & tri.T).sum(axis=1)
    return RankCIs.from_arrays(lo, hi, sample)


def _block_stat_table(sample):
    """stat[s, e] = max standardized gap to the block minimum, for block s..e.

    On sorted observations the block minimum sits at the left edge, so
    each row is a running maximum of (y_e - y_s) / sqrt(sigma_s^2 +
    sigma_e^2) over e; entries below the diagonal are zero.
    """
    y = sample.y
    s2 = sample.sigma**2
    gaps = (y[None, :] - y[:, None]) / np.sqrt(s2[:, None] + s2[None, :])
    gaps = np.triu(gaps, k=1)
    return np.ascontiguousarray(np.maximum.accumulate(gaps, axis=1))


def _pool_misordered(sample, blocks):
    """Merge adjacent blocks until each block's max stays below the next min.

    ``blocks`` lists member index collections in the partition's own
    order.  Pooling never changes the test's outcome — a block pair in
    the wrong observed order hands the merged block the same extreme
    members — and leaves correctly ordered partitions untouched.
    """
    y = sample.y
    stack = []
    for blk in blocks:
        cur = sorted(int(c) for c in blk)
        while stack and y[stack[-1][-1]] > y[cur[0]]:
            prev = stack.pop()
            cur = sorted(prev + cur)
        stack.append(cur)
    return stack


def tukey_partition_test(sample, hypothesis, q):
    """Reject/keep one equality hypothesis with the max-type block statistic.

    Accepts an :class:`~rankci.model.OrderedHypothesis` or an explicit
    sequence of blocks (collections of 0-based sorted-center indices) in
    the partition's own order; misordered blocks are pooled first.  The
    statistic is the max over blocks of the standardized gap between each
    member and the block's smallest observation; singleton blocks score
    zero, so the all-singleton hypothesis is never rejected.  Returns
    True when rejected.  One shared ``q`` serves every hypothesis.
    """
    if isinstance(hypothesis, OrderedHypothesis):
        if hypothesis.n != sample.n:
            raise ValueError("hypothesis size does not match the sample")
        blocks = [tuple(range(s, e + 1)) for s, e in hypothesis.blocks()]
    else:
        blocks = [tuple(int(c) for c in blk) for blk in hypothesis]
        seen = sorted(c for blk in blocks for c in blk)
        if seen != list(range(sample.n)) or any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must partition range(n) into non-empty sets")
    y = sample.y
    s2 = sample.sigma**2
    stat = 0.0
    for members in _pool_misordered(sample, blocks):
        m = members[0]
        for c in members[1:]:
            val = (y[c] - y[m]) / np.sqrt(s2[m] + s2[c])
            if val > stat:
                stat = float(val)
    return stat > q


def tukey_partition_cis(sample, alpha=0.05, q=None, mc=None, *,
                        max_n=PARTITION_GUARD, force=False):
    """Rank CIs by sweeping ordered hypotheses with the max-type statistic.

    Unions the rank sets of every hypothesis whose statistic stays within
    the shared quantile ``q``.  Only correctly ordered hypotheses are
    swept — pooling makes misordered ones redundant, their pooled form
    scores identically and spans at least as much.
    """
    n = sample.n
    if n == 1:
        return RankCIs.from_arrays([1], [1], sample)
    if n > max_n and not force:
        raise GuardError(
            f"n={n} exceeds the partition-form guard ({max_n}); "
            "tukey_pairwise_cis is the production procedure"
        )
    q = _resolve_q(sample, alpha, q, mc)
    table = _block_stat_table(sample)
    if table[0, n - 1] <= q:
        return RankCIs.from_arrays(np.ones(n, dtype=int), np.full(n, n), sample)
    crit = np.full(n, q, dtype=float)
    smin = np.arange(n, dtype=np.int64)
    emax = np.arange(n, dtype=np.int64)
    kernels.masks_union(table, kernels.AGG_MAX, crit, smin, emax, 1)
    return RankCIs.from_arrays(smin + 1, emax + 1, sample)
