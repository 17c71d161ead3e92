"""Domain types for rank confidence intervals.

Holds the observed sample, the encoding of ordered equality/inequality
hypotheses over the sorted centers, integer rank intervals, the rule that
maps a hypothesis to its critical value, and the combinatorial helpers
(hypothesis codecs and counts).
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "Sample",
    "OrderedHypothesis",
    "RankCIs",
    "CriticalPolicy",
    "rank_set",
    "cns_encode",
    "cns_decode",
    "count_ordered_hypotheses",
    "count_all_partitions",
    "partition_count_factorial_formula",
]


class GuardError(ValueError):
    """Raised when an input exceeds a size guard for exhaustive enumeration."""


@dataclass(frozen=True)
class Sample:
    """One observation per center with a known standard deviation.

    The constructor canonicalizes: centers are stably sorted by observed
    value, and ``original_index`` maps each sorted position back to the
    input row so output tables can be emitted in the original order.

    Parameters
    ----------
    labels : sequence of str
        Identifier per center, in input order.
    y : sequence of float
        Observed value per center, in input order.
    sigma : sequence of float
        Known standard deviation per center (strictly positive).
    """

    labels: tuple = field(default=())
    y: np.ndarray = field(default=None)
    sigma: np.ndarray = field(default=None)
    original_index: np.ndarray = field(default=None, compare=False)

    def __init__(self, labels, y, sigma):
        y = np.asarray(y, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        labels = tuple(str(l) for l in labels)
        if y.ndim != 1 or sigma.ndim != 1:
            raise ValueError("y and sigma must be one-dimensional")
        if not (len(labels) == len(y) == len(sigma)):
            raise ValueError(
                "labels, y and sigma must have the same length, got "
                f"{len(labels)}, {len(y)}, {len(sigma)}"
            )
        if len(y) == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(y)):
            raise ValueError("observations must be finite")
        if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
            raise ValueError("standard deviations must be finite and > 0")
        order = np.argsort(y, kind="stable")
        object.__setattr__(self, "labels", tuple(labels[i] for i in order))
        object.__setattr__(self, "y", y[order])
        object.__setattr__(self, "sigma", sigma[order])
        object.__setattr__(self, "original_index", order)
        self.y.setflags(write=False)
        self.sigma.setflags(write=False)
        self.original_index.setflags(write=False)

    @property
    def n(self):
        return len(self.y)

    @property
    def weights(self):
        """Precision weights 1/sigma**2, in sorted order."""
        return 1.0 / self.sigma**2

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.labels == other.labels
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.sigma, other.sigma)
        )

    def __hash__(self):
        return hash((self.labels, self.y.tobytes(), self.sigma.tobytes()))


@dataclass(frozen=True)
class OrderedHypothesis:
    """An ordered partition of the sorted centers into equality blocks.

    ``gap_mask`` holds the positions g in {1, ..., n-1} where a strict
    inequality separates sorted centers g and g+1; every position not in
    the mask is an equality.  The hypothesis therefore consists of
    ``len(gap_mask) + 1`` consecutive blocks covering positions 1..n.
    """

    n: int
    gap_mask: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "gap_mask", frozenset(self.gap_mask))
        for g in self.gap_mask:
            if not 1 <= g <= self.n - 1:
                raise ValueError(f"gap position {g} outside 1..{self.n - 1}")

    @classmethod
    def from_mask_int(cls, n, mask):
        """Build from a bitmask where bit (g-1) set means a gap at position g."""
        if not 0 <= mask < (1 << max(n - 1, 0)):
            raise ValueError(f"mask {mask} out of range for n={n}")
        return cls(n, frozenset(g for g in range(1, n) if mask >> (g - 1) & 1))

    def to_mask_int(self):
        m = 0
        for g in self.gap_mask:
            m |= 1 << (g - 1)
        return m

    @property
    def n_blocks(self):
        return len(self.gap_mask) + 1

    @property
    def n_equalities(self):
        return self.n - self.n_blocks

    def blocks(self):
        """Yield the blocks as 0-based inclusive index pairs (start, end)."""
        start = 0
        for g in sorted(self.gap_mask):
            yield (start, g - 1)
            start = g
        yield (start, self.n - 1)

    def rank_intervals(self):
        """Per sorted center, the 1-based rank interval this hypothesis implies."""
        out = [None] * self.n
        for s, e in self.blocks():
            for c in range(s, e + 1):
                out[c] = (s + 1, e + 1)
        return out


@dataclass(frozen=True)
class RankCIs:
    """Per-center integer rank intervals [a_i, b_i] on 1..n, in sorted order.

    ``labels`` and ``original_index`` carry the mapping back to the input
    rows of the sample the intervals were computed from.
    """

    intervals: tuple
    labels: tuple = ()
    original_index: tuple = ()

    def __post_init__(self):
        ivals = tuple((int(a), int(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivals)
        n = len(ivals)
        for i, (a, b) in enumerate(ivals):
            if not 1 <= a <= b <= n:
                raise ValueError(f"interval {i}: [{a}, {b}] invalid for n={n}")

    @classmethod
    def from_arrays(cls, lo, hi, sample=None):
        labels = sample.labels if sample is not None else ()
        oidx = tuple(int(i) for i in sample.original_index) if sample is not None else ()
        return cls(tuple(zip(map(int, lo), map(int, hi))), labels, oidx)

    @property
    def n(self):
        return len(self.intervals)

    @property
    def lo(self):
        return np.array([a for a, _ in self.intervals])

    @property
    def hi(self):
        return np.array([b for _, b in self.intervals])

    def widths(self):
        """Number of ranks each interval covers (b - a + 1)."""
        return np.array([b - a + 1 for a, b in self.intervals])

    def contains(self, other):
        """True if every interval of `other` lies inside the matching one here."""
        return all(
            a <= oa and ob <= b
            for (a, b), (oa, ob) in zip(self.intervals, other.intervals)
        )

    def check(self):
        """Validate the structural invariants; returns self.

        Every center's empirical rank (its sorted position) must lie in its
        own interval, and both endpoint sequences must be non-decreasing.
        """
        for i, (a, b) in enumerate(self.intervals, start=1):
            if not a <= i <= b:
                raise AssertionError(f"center {i} outside its interval [{a}, {b}]")
        for (a0, b0), (a1, b1) in zip(self.intervals, self.intervals[1:]):
            if a1 < a0 or b1 < b0:
                raise AssertionError("interval endpoints are not monotone")
        return self


# -- critical-value rules ----------------------------------------------------

CHI_SQUARE_BY_EQUALITIES = "chi-square-by-equalities"
LEAST_FAVORABLE_MIXTURE = "least-favorable-mixture"
AFFINE = "affine"


@dataclass(frozen=True)
class CriticalPolicy:
    """Rule mapping a hypothesis (via its equality count) to a critical value.

    Kinds
    -----
    chi-square-by-equalities
        Quantile of a chi-square with df = number of equalities; a hypothesis
        with zero equalities is never rejected (its statistic is exactly 0).
    least-favorable-mixture
        Quantile of the chi-square mixture law of the test statistic under
        the all-equal configuration, equal-sigma weights.
    affine
        slope * equalities + intercept; used by the bracketing screens.
    """

    kind: str
    alpha: float
    slope: float = None
    intercept: float = None

    def __post_init__(self):
        if self.kind not in (CHI_SQUARE_BY_EQUALITIES, LEAST_FAVORABLE_MIXTURE, AFFINE):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.kind == AFFINE:
            if self.slope is None or self.intercept is None:
                raise ValueError("affine policy needs slope and intercept")
            if self.slope <= 0:
                raise ValueError("affine slope must be > 0")

    @classmethod
    def chi_square_by_equalities(cls, alpha):
        return cls(CHI_SQUARE_BY_EQUALITIES, alpha)

    @classmethod
    def least_favorable_mixture(cls, alpha):
        return cls(LEAST_FAVORABLE_MIXTURE, alpha)

    @classmethod
    def affine(cls, slope, intercept, alpha):
        return cls(AFFINE, alpha, slope=slope, intercept=intercept)

    def critical_value(self, n, equalities):
        """Critical value for a hypothesis on n centers with the given equality count."""
        if not 0 <= equalities <= n - 1:
            raise ValueError(f"equalities {equalities} outside 0..{n - 1}")
        if self.kind == AFFINE:
            return self.slope * equalities + self.intercept
        if self.kind == CHI_SQUARE_BY_EQUALITIES:
            if equalities == 0:
                # Degenerate chi-square: all mass at 0.  The ordered
                # all-singleton hypothesis has statistic exactly 0 and is
                # never rejected; a misordered one carries a positive
                # isotonic cost and is rejected outright.
                return 0.0
            from .numerics import chi_square_quantile

            return chi_square_quantile(equalities, 1.0 - self.alpha)
        from .numerics import least_favorable_quantile

        return least_favorable_quantile(n, 1.0 - self.alpha, equalities=equalities)

    def critical_values(self, n):
        """Vector of critical values indexed by equality count 0..n-1."""
        return np.array([self.critical_value(n, k) for k in range(n)])


# -- rank sets ---------------------------------------------------------------

def rank_set(mu):
    """Exact rank sets of a real vector, ties sharing an interval.

    Center i receives the integer interval spanning every position it can
    occupy across all non-decreasing sortings of ``mu``; with no ties this is
    the usual rank, and tied values share the interval covering their run.

    Parameters
    ----------
    mu : sequence of float
        Finite real values, one per center (input order).

    Returns
    -------
    list of (int, int)
        1-based inclusive rank interval per center, in input order.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.size == 0:
        raise ValueError("empty input")
    if not np.all(np.isfinite(mu)):
        raise ValueError("values must be finite")
    below = (mu[None, :] < mu[:, None]).sum(axis=1)
    at_or_below = (mu[None, :] <= mu[:, None]).sum(axis=1)
    return [(int(b) + 1, int(ab)) for b, ab in zip(below, at_or_below)]


# -- combinatorial number system codec ----------------------------------------

def cns_encode(positions):
    """Rank a strictly increasing tuple of 0-based positions.

    The index is sum(binom(c_i, i)) over 1-based coordinate number i, the
    standard combinatorial number system, so tuples map bijectively onto
    0..binom(n-1, k)-1 when positions are drawn from {0, ..., n-2}.
    """
    positions = tuple(int(c) for c in positions)
    for a, b in zip(positions, positions[1:]):
        if b <= a:
            raise ValueError(f"positions must be strictly increasing, got {positions}")
    if positions and positions[0] < 0:
        raise ValueError("positions must be non-negative")
    return sum(math.comb(c, i) for i, c in enumerate(positions, start=1))


def cns_decode(index, k, n=None):
    """Invert :func:`cns_encode`: the index-th k-tuple in ascending order.

    Uses the greedy descent: the largest coordinate is the maximal c with
    binom(c, k) <= index, and the remainder recurses on k-1.  When ``n`` is
    given, ``index`` is validated against binom(n-1, k).
    """
    index = int(index)
    if index < 0:
        raise ValueError("index must be non-negative")
    if k < 0:
        raise ValueError("k must be non-negative")
    if n is not None and index >= math.comb(n - 1, k):
        raise ValueError(f"index {index} out of range for n={n}, k={k}")
    out = []
    remaining = index
    for i in range(k, 0, -1):
        # Largest c with binom(c, i) <= remaining; grow then step back.
        c = i - 1  # binom(i-1, i) = 0 <= remaining always holds
        while math.comb(c + 1, i) <= remaining:
            c += 1
        out.append(c)
        remaining -= math.comb(c, i)
    out.reverse()
    return tuple(out)


# -- counting ----------------------------------------------------------------

def count_ordered_hypotheses(n):
    """Number of hypotheses whose block order agrees with the sorted data: 2**(n-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 62:
        raise GuardError("n > 62 exceeds the supported count range")
    return 1 << (n - 1)


@lru_cache(maxsize=None)
def count_all_partitions(n):
    """Number of ordered set partitions (weak orders) of n centers.

    Computed by the recurrence a(n) = sum_j binom(n, j) * a(n-j) with
    a(0) = 1; this is the enumeration-true count of all hypotheses in the
    partitioning scheme, including incorrectly ordered ones.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > 20:
        raise GuardError("n > 20 exceeds the supported count range")
    if n == 0:
        return 1
    return sum(math.comb(n, j) * count_all_partitions(n - j) for j in range(1, n + 1))


def partition_count_factorial_formula(n):
    """The factorial-sum count sum_{l=1}^{n} n!/l!.

    Reported alongside :func:`count_all_partitions` for comparison; the two
    disagree (e.g. 10 vs 13 at n=3), and this package treats the enumeration
    count as authoritative everywhere partitions are actually enumerated.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(math.factorial(n) // math.factorial(l) for l in range(1, n + 1))
