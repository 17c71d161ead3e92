"""Polynomial-time bracketing of the exact rank CIs via affine critical bounds.

The exact method keeps a hypothesis when its statistic stays below a
chi-square quantile in the hypothesis's equality count k.  Replacing that
quantile curve q(k) with an affine line a*k + b makes "some hypothesis
containing block i..j survives" decidable by dynamic programming: the
statistic minus a times the equality count is additive over blocks, so the
best completion of a block is the sum of minimum left and right
sub-partition contributions.

A line below q yields intervals contained in the exact ones; a line above
q yields intervals containing them.  Between the two brackets every center
is localized to within a small gap, and centers where both agree are
exactly solved.  :func:`hybrid_exact` closes the remaining gap with the
block-check search seeded by the brackets.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import RankCIs
from .numerics import chi_square_quantile
from .partition import BlockBounds, block_sse_table, ci_block_check, ci_level_by_level

__all__ = [
    "BoundValidationError",
    "AffineBound",
    "ContributionMatrix",
    "build_affine_bounds",
    "min_contrib_matrix",
    "bracket_cis",
    "adjust_lower_bound",
    "adjust_upper_bound",
    "extract_block_bounds",
    "hybrid_exact",
]

#: Slack for pointwise bound validation against the quantile curve.
VALIDATION_TOL = 1e-9


class BoundValidationError(ValueError):
    """An affine bound failed its pointwise comparison with the quantile curve."""


@dataclass(frozen=True)
class AffineBound:
    """An affine line in the equality count bracketing the quantile curve.

    ``side`` declares the direction: an "upper" bound satisfies
    slope*k + intercept >= q(k) and a "lower" bound <= q(k), where q(k) is
    the chi-square(k) quantile at 1 - alpha, for every k in the inclusive
    ``k_range``.  The comparison is checked pointwise at construction and
    a violation raises :class:`BoundValidationError` — callers integrate
    alternative lines by skipping the bad one, never by patching it.
    """

    slope: float
    intercept: float
    side: str
    n: int
    alpha: float
    k_range: tuple

    def __post_init__(self):
        if self.side not in ("upper", "lower"):
            raise ValueError("side must be 'upper' or 'lower'")
        k_lo, k_hi = self.k_range
        if not (1 <= k_lo <= k_hi <= self.n - 1):
            raise ValueError("k_range must lie within {1, ..., n-1}")
        for k in range(k_lo, k_hi + 1):
            q = chi_square_quantile(k, 1.0 - self.alpha)
            val = self.evaluate(k)
            if self.side == "upper" and val < q - VALIDATION_TOL:
                raise BoundValidationError(
                    f"upper bound {val:.6g} below quantile {q:.6g} at k={k}"
                )
            if self.side == "lower" and val > q + VALIDATION_TOL:
                raise BoundValidationError(
                    f"lower bound {val:.6g} above quantile {q:.6g} at k={k}"
                )

    def evaluate(self, k):
        return self.slope * k + self.intercept


def build_affine_bounds(n, alpha):
    """Default (upper, lower) affine brackets of the quantile curve.

    The quantile q(k) is concave in k, so the secant continuation through
    (n-2, q(n-2)) and (n-1, q(n-1)) stays above the curve while the chord
    through (1, q(1)) and (n-1, q(n-1)) stays below it; both are still
    validated pointwise.  Needs n >= 3 for the two lines to be distinct
    and defined.
    """
    if n < 3:
        raise ValueError("affine bracketing needs n >= 3")
    p = 1.0 - alpha
    q1 = chi_square_quantile(1, p)
    q_last = chi_square_quantile(n - 1, p)
    q_prev = chi_square_quantile(n - 2, p)
    a_up = q_last - q_prev
    upper = AffineBound(a_up, q_last - a_up * (n - 1), "upper", n, alpha, (1, n - 1))
    a_lo = (q_last - q1) / (n - 2)
    lower = AffineBound(a_lo, q1 - a_lo, "lower", n, alpha, (1, n - 1))
    return upper, lower


def adjust_lower_bound(n, alpha, n0):
    """Tighter lower chord anchored at equality counts n0-1 and n-1.

    Moving the left anchor from k=1 up to k=n0-1 hugs the concave
    quantile curve more closely: the chord shares the right anchor with
    the default one, so it sits above it everywhere on its validity range
    even though its slope is smaller.  Valid only for hypotheses with at
    least n0-1 equalities (its ``k_range``), so re-screening with it must
    be restricted to blocks of at least n0 centers.  With n0=2 this
    reproduces the default lower bound.
    """
    if not 2 <= n0 < n:
        raise ValueError("n0 must satisfy 2 <= n0 < n")
    p = 1.0 - alpha
    q_anchor = chi_square_quantile(n0 - 1, p)
    q_last = chi_square_quantile(n - 1, p)
    a = (q_last - q_anchor) / (n - n0)
    b = q_anchor - a * (n0 - 1)
    return AffineBound(a, b, "lower", n, alpha, (n0 - 1, n - 1))


def adjust_upper_bound(n, alpha, t):
    """Upper line touching the quantile curve at k=t instead of k=n-1.

    Slope is the curve's increment q(t) - q(t-1); concavity puts the line
    above the curve on both sides of t, which the constructor still
    verifies over all of {1, ..., n-1}.  Lines from several touch points
    screen to smaller interval systems near their t and can be intersected.
    """
    if not 2 <= t <= n - 1:
        raise ValueError("tangent point must satisfy 2 <= t <= n-1")
    p = 1.0 - alpha
    qt = chi_square_quantile(t, p)
    a = qt - chi_square_quantile(t - 1, p)
    return AffineBound(a, qt - a * t, "upper", n, alpha, (1, n - 1))


@dataclass(frozen=True)
class ContributionMatrix:
    """Minimum sub-partition contributions under an affine bound.

    ``min_contrib[i, j]`` is the minimum over ordered sub-partitions of
    sorted centers i..j of the partition's summed block SSE minus
    ``bound.slope`` times its equality count; the diagonal is zero.
    ``left``/``right`` read the complement contributions used by the
    block screen, with empty ranges contributing zero.
    """

    min_contrib: np.ndarray
    bound: AffineBound

    def left(self, i):
        """Minimum contribution of centers 0..i-1 (0 when i == 0)."""
        return 0.0 if i <= 0 else float(self.min_contrib[0, i - 1])

    def right(self, j):
        """Minimum contribution of centers j+1..n-1 (0 when j == n-1)."""
        n = self.min_contrib.shape[0]
        return 0.0 if j >= n - 1 else float(self.min_contrib[j + 1, n - 1])


def min_contrib_matrix(sample, bound, table=None):
    """Fill the :class:`ContributionMatrix` for ``sample`` under ``bound``."""
    if table is None:
        table = block_sse_table(sample)
    adjusted = _adjusted_table(table, bound.slope)
    return ContributionMatrix(kernels.min_contrib_fill(adjusted), bound)


def _adjusted_table(table, slope):
    n = table.shape[0]
    idx = np.arange(n)
    spans = idx[None, :] - idx[:, None]
    return np.ascontiguousarray(np.triu(table - slope * spans))


def _screen_cis(sample, table, bound, min_span=None):
    """Intervals from blocks some affine-screened hypothesis keeps.

    Block i..j passes when its adjusted SSE plus the minimum left and
    right complement contributions stays within the bound's intercept —
    equivalently, some hypothesis containing the block has statistic
    within the affine bound at its equality count.  Kept block spans are
    unioned into per-center intervals, starting from the always-kept
    singletons.  ``min_span`` restricts screening to blocks with at least
    that many equalities (for bounds valid only on a sub-range).
    """
    n = sample.n
    adjusted = _adjusted_table(table, bound.slope)
    mc = kernels.min_contrib_fill(adjusted)
    left = np.concatenate([[0.0], mc[0, : n - 1]])
    right = np.concatenate([mc[1:, n - 1], [0.0]])
    total = adjusted + left[:, None] + right[None, :]
    idx = np.arange(n)
    spans = idx[None, :] - idx[:, None]
    keep = (total <= bound.intercept) & (spans >= (1 if min_span is None else min_span))
    lo = idx.copy()
    hi = idx.copy()
    for i, j in np.argwhere(keep):
        np.minimum(lo[i : j + 1], i, out=lo[i : j + 1])
        np.maximum(hi[i : j + 1], j, out=hi[i : j + 1])
    return RankCIs.from_arrays(lo + 1, hi + 1, sample)


def _intersect(a, b, sample):
    return RankCIs.from_arrays(
        np.maximum(a.lo, b.lo), np.minimum(a.hi, b.hi), sample
    )


def _union(a, b, sample):
    return RankCIs.from_arrays(
        np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi), sample
    )


def observed_min_block_size(lower, upper):
    """Smallest implied block size among centers the brackets leave open.

    Reads, for each sorted center, the block size implied by its inner
    (lower) interval's right end, and minimizes over centers that are not
    yet settled — ignoring centers past the first whose inner interval
    already reaches the last rank, since block sizes beyond that point
    shrink for geometric reasons alone.  Returns None when every
    considered center is settled.
    """
    n = lower.n
    hi0 = np.asarray(lower.hi) - 1
    idx = np.arange(n)
    min_block = hi0 - idx + 1
    cutoff = int(np.argmax(hi0 == n - 1))
    unsettled = (np.asarray(lower.lo) != np.asarray(upper.lo)) | (
        np.asarray(lower.hi) != np.asarray(upper.hi)
    )
    candidates = min_block[: cutoff + 1][unsettled[: cutoff + 1]]
    if candidates.size == 0:
        return None
    return int(candidates.min())


def bracket_cis(sample, alpha=0.05, *, tangent_points=None, adjust_lower=False):
    """(inner, outer) rank CIs sandwiching the exact partitioning CIs.

    The inner system comes from the lower affine bound (every kept
    hypothesis is genuinely unrejected), the outer one from the upper
    bound (every genuinely unrejected hypothesis is kept), so
    inner[i] ⊆ exact[i] ⊆ outer[i] for every center.  O(n³) time.

    tangent_points
        Optional extra touch points for the upper bound; each extra
        line's intervals are intersected into the outer system.  Points
        outside {2, ..., n-2} are ignored; a line failing validation is
        skipped with a warning.
    adjust_lower
        Re-screen blocks of at least the observed minimum open block size
        with a steeper chord and union the result into the inner system.
    """
    n = sample.n
    if n < 3:
        raise ValueError("bracketing needs n >= 3")
    upper_bound, lower_bound = build_affine_bounds(n, alpha)
    table = block_sse_table(sample)
    inner = _screen_cis(sample, table, lower_bound)
    outer = _screen_cis(sample, table, upper_bound)
    if tangent_points is not None:
        for t in sorted({int(t) for t in tangent_points}, reverse=True):
            if not 2 <= t <= n - 2:
                continue
            try:
                extra = adjust_upper_bound(n, alpha, t)
            except BoundValidationError as exc:
                warnings.warn(
                    f"skipping upper-bound touch point t={t}: {exc}",
                    RuntimeWarning,
                    stacklevel=2,
                )
                continue
            outer = _intersect(outer, _screen_cis(sample, table, extra), sample)
    if adjust_lower:
        n0 = observed_min_block_size(inner, outer)
        if n0 is not None and n0 >= 3:
            try:
                chord = adjust_lower_bound(n, alpha, n0)
            except BoundValidationError as exc:
                warnings.warn(
                    f"skipping lower-bound adjustment at n0={n0}: {exc}",
                    RuntimeWarning,
                    stacklevel=2,
                )
            else:
                refined = _screen_cis(sample, table, chord, min_span=n0 - 1)
                inner = _union(inner, refined, sample)
    return inner, outer


def extract_block_bounds(lower, upper):
    """Seed :class:`~rankci.partition.BlockBounds` from a bracket pair.

    Minimum block sizes come from the inner intervals' right ends (those
    blocks are certainly kept), maximum sizes from the outer ones (larger
    blocks are certainly rejected); centers whose inner and outer
    intervals already agree are marked settled.
    """
    n = lower.n
    if upper.n != n:
        raise ValueError("bracket systems differ in length")
    idx = np.arange(n)
    min_block = np.asarray(lower.hi) - 1 - idx + 1
    max_block = np.asarray(upper.hi) - 1 - idx + 1
    settled = (np.asarray(lower.lo) == np.asarray(upper.lo)) & (
        np.asarray(lower.hi) == np.asarray(upper.hi)
    )
    return BlockBounds(min_block, max_block, lower, settled)


def hybrid_exact(sample, alpha=0.05, *, tangent_points=None, adjust_lower=True):
    """Exact rank CIs at bracketing speed: bracket, then close the gap.

    Runs :func:`bracket_cis`, converts the sandwich into per-center block
    size bounds, and finishes with the block-check search on the
    unsettled centers only.  ``tangent_points=None`` uses the default
    touch points {n//2, n//4}; pass an empty sequence to disable the
    upper-bound intersection.  For n < 3 (no bracketing defined) this
    falls through to plain enumeration, which is trivial there.
    """
    n = sample.n
    if n < 3:
        return ci_level_by_level(sample, alpha)
    if tangent_points is None:
        tangent_points = (n // 2, n // 4)
    inner, outer = bracket_cis(
        sample, alpha, tangent_points=tangent_points, adjust_lower=adjust_lower
    )
    bounds = extract_block_bounds(inner, outer)
    if bool(bounds.settled.all()):
        return inner
    return ci_block_check(sample, alpha, bounds, max_n=n, force=True)
