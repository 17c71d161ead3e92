"""Scalar and statistical numerics.

Chi-square quantiles by safeguarded Newton inversion, the chi-square mixture
law of the order-constrained test statistic under the all-equal configuration
(equal-sigma weights from unsigned Stirling numbers), studentized-range
quantiles by seeded Monte Carlo, weighted means, isotonic regression (PAVA),
and the weighted sum-of-squares split identity.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammainc, gammaincc, gammaln, ndtri

__all__ = [
    "MixtureWeights",
    "McConfig",
    "chi_square_quantile",
    "stirling1_unsigned",
    "mixture_weights_equal_sigma",
    "least_favorable_tail",
    "least_favorable_quantile",
    "studentized_range_quantile",
    "weighted_mean",
    "weighted_sse",
    "pava",
    "split_sum_of_squares",
]

STIRLING_MAX_N = 170  # factorials overflow float64 shortly beyond this


# -- chi-square quantile -------------------------------------------------------

def _chi2_cdf(df, x):
    return gammainc(df / 2.0, x / 2.0)


def _chi2_logpdf(df, x):
    a = df / 2.0
    return (a - 1.0) * math.log(x / 2.0) - x / 2.0 - gammaln(a) - math.log(2.0)


@lru_cache(maxsize=None)
def chi_square_quantile(df, p):
    """Quantile of the chi-square distribution with ``df`` degrees of freedom.

    Numeric inversion of the regularized incomplete gamma CDF: a
    normal-approximation transform supplies the initial guess, refined by
    Newton steps safeguarded by bisection on a maintained bracket.  The
    result q satisfies |CDF(q) - p| <= 1e-10.

    Parameters
    ----------
    df : int
        Degrees of freedom, >= 1.
    p : float
        Probability level in (0, 1).

    Raises
    ------
    RuntimeError
        If the iteration has not met the tolerance after the iteration cap.
    """
    df = int(df)
    if df < 1:
        raise ValueError("df must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")

    # Initial guess: cube of a shifted/scaled normal quantile.
    z = ndtri(p)
    t = 1.0 - 2.0 / (9.0 * df) + z * math.sqrt(2.0 / (9.0 * df))
    x = df * t**3 if t > 0 else 0.5 * df

    lo, hi = 0.0, max(4.0 * x, df + 10.0, 1.0)
    while _chi2_cdf(df, hi) < p:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("chi-square quantile: failed to bracket the root")
    x = min(max(x, lo + 1e-12), hi)

    for _ in range(200):
        f = _chi2_cdf(df, x) - p
        if abs(f) < 1e-14:
            break
        if f > 0:
            hi = x
        else:
            lo = x
        step = f * math.exp(-_chi2_logpdf(df, x))
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if nxt == x:
            break
        x = nxt

    if abs(_chi2_cdf(df, x) - p) > 1e-10:
        raise RuntimeError(
            f"chi-square quantile did not converge for df={df}, p={p}"
        )
    return x


# -- mixture law under the all-equal configuration -----------------------------

@lru_cache(maxsize=None)
def _stirling_row(n):
    """Unsigned Stirling numbers of the first kind s(n, l), l = 0..n, exact."""
    row = (1,)
    for m in range(n):
        prev = row
        row = tuple(
            (prev[l - 1] if l >= 1 else 0) + m * (prev[l] if l <= m else 0)
            for l in range(m + 2)
        )
    return row


def stirling1_unsigned(n, l):
    """Unsigned Stirling number of the first kind, exact big integer.

    Computed by the recurrence s(n+1, l) = s(n, l-1) + n*s(n, l) with
    s(0, 0) = 1.  Supported for 1 <= l <= n <= 170.
    """
    if not 1 <= n <= STIRLING_MAX_N:
        raise ValueError(f"n must be in 1..{STIRLING_MAX_N}")
    if not 1 <= l <= n:
        raise ValueError("l must be in 1..n")
    return _stirling_row(n)[l]


@dataclass(frozen=True)
class MixtureWeights:
    """Mixture weights P(1,n)..P(n,n) of the all-equal-configuration law."""

    n: int
    P: tuple

    def __post_init__(self):
        if len(self.P) != self.n:
            raise ValueError("need exactly n weights")
        if any(w < 0 for w in self.P):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.P) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")


@lru_cache(maxsize=None)
def mixture_weights_equal_sigma(n):
    """Equal-sigma mixture weights P(l, n) = s(n, l) / n!, exact then rounded."""
    if not 1 <= n <= STIRLING_MAX_N:
        raise ValueError(f"n must be in 1..{STIRLING_MAX_N}")
    row = _stirling_row(n)
    fact = math.factorial(n)
    return MixtureWeights(n, tuple(float(Fraction(row[l], fact)) for l in range(1, n + 1)))


def _chi2_sf(df, gamma):
    """Upper tail of chi-square(df); df = 0 is a point mass at zero."""
    if df == 0:
        return 1.0 if gamma < 0 else 0.0
    return float(gammaincc(df / 2.0, gamma / 2.0)) if gamma > 0 else 1.0


def least_favorable_tail(gamma, n, equalities=0):
    """Tail P(statistic > gamma) under the all-equal configuration, equal sigma.

    For a hypothesis on ``n`` centers with ``equalities`` equality constraints
    (every configuration with the same equality/inequality counts shares this
    law), the statistic's distribution is the chi-square mixture

        sum_{l=0}^{m-1} P(l+1, m) * P(chi2(n - l - 1) > gamma),

    where m = n - equalities is the number of blocks and the weights are the
    equal-sigma mixture weights on m pseudo-centers.

    Parameters
    ----------
    gamma : float
        Threshold, >= 0.
    n : int
        Number of centers, >= 2.
    equalities : int
        Number of equality constraints, 0 <= equalities <= n - 1.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 <= equalities <= n - 1:
        raise ValueError("equalities outside 0..n-1")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    m = n - equalities
    weights = mixture_weights_equal_sigma(m).P
    return sum(weights[l] * _chi2_sf(n - l - 1, gamma) for l in range(m))


@lru_cache(maxsize=None)
def least_favorable_quantile(n, p, equalities=0):
    """gamma with tail probability 1 - p under the all-equal mixture law."""
    alpha = 1.0 - p
    if least_favorable_tail(0.0, n, equalities) <= alpha:
        return 0.0
    hi = 4.0 * n + 16.0
    while least_favorable_tail(hi, n, equalities) > alpha:
        hi *= 2.0
    return brentq(
        lambda g: least_favorable_tail(g, n, equalities) - alpha,
        0.0,
        hi,
        xtol=1e-12,
        rtol=8.9e-16,
    )


# -- studentized range ----------------------------------------------------------

@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings: draw count and the seed all randomness flows from."""

    sample_count: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if self.sample_count < 1000:
            raise ValueError("sample_count must be >= 1000")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")


_MC_CHUNK = 20_000
_PAIR_BATCH = 2_000


def studentized_range_quantile(sigma, p, mc=McConfig()):
    """Empirical quantile of max_{i<j} |Y_i - Y_j| / sqrt(s_i^2 + s_j^2).

    The Y_i are independent centered Gaussians with the given standard
    deviations.  Draws come from a counter-based generator keyed by
    ``mc.seed``, so the result is reproducible bit-for-bit for a fixed
    (seed, sample_count); the quantile is the ceil(p*N)-th order statistic
    (the conservative side).

    Centers sharing a standard deviation are grouped, which reduces the
    per-draw cost from O(n^2) pairs to group extremes plus O(u^2) unique
    pairs.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 1 or sigma.size < 2:
        raise ValueError("need at least two centers")
    if np.any(sigma <= 0) or not np.all(np.isfinite(sigma)):
        raise ValueError("standard deviations must be finite and > 0")
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")

    uniq, inverse = np.unique(sigma, return_inverse=True)
    u = len(uniq)
    counts = np.bincount(inverse, minlength=u)
    col_order = np.argsort(inverse, kind="stable")
    group_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])

    pair_a, pair_b, pair_denom = [], [], []
    for a in range(u):
        for b in range(a, u):
            if a == b and counts[a] < 2:
                continue
            pair_a.append(a)
            pair_b.append(b)
            pair_denom.append(math.sqrt(uniq[a] ** 2 + uniq[b] ** 2))
    pair_a = np.array(pair_a)
    pair_b = np.array(pair_b)
    pair_denom = np.array(pair_denom)

    rng = np.random.Generator(np.random.Philox(key=int(mc.seed)))
    stats = np.empty(mc.sample_count)
    done = 0
    while done < mc.sample_count:
        m = min(_MC_CHUNK, mc.sample_count - done)
        draws = rng.standard_normal((m, sigma.size)) * sigma
        grouped = draws[:, col_order]
        gmax = np.maximum.reduceat(grouped, group_starts, axis=1)
        gmin = np.minimum.reduceat(grouped, group_starts, axis=1)
        best = np.zeros(m)
        for s in range(0, len(pair_a), _PAIR_BATCH):
            a = pair_a[s : s + _PAIR_BATCH]
            b = pair_b[s : s + _PAIR_BATCH]
            span = np.maximum(gmax[:, a] - gmin[:, b], gmax[:, b] - gmin[:, a])
            np.maximum(best, (span / pair_denom[s : s + _PAIR_BATCH]).max(axis=1), out=best)
        stats[done : done + m] = best
        done += m

    stats.sort()
    k = math.ceil(p * mc.sample_count)
    return float(stats[k - 1])


# -- weighted means and sums of squares ------------------------------------------

def weighted_mean(y, sigma, start=0, stop=None):
    """Precision-weighted mean of y[start:stop]: (sum y/s^2) / (sum 1/s^2)."""
    y = np.asarray(y, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    ys = y[start:stop]
    ss = sigma[start:stop]
    if ys.size == 0:
        raise ValueError("empty range")
    w = 1.0 / ss**2
    return float(np.sum(w * ys) / np.sum(w))


def weighted_sse(y, weights):
    """Weighted sum of squares of y about its weighted mean."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.size == 0:
        return 0.0
    m = np.sum(w * y) / np.sum(w)
    return float(np.sum(w * (y - m) ** 2))


def pava(y, weights):
    """Weighted least-squares projection onto the non-decreasing cone.

    Pool-adjacent-violators: scan left to right, and whenever the fitted
    value would decrease, merge the offending blocks into one carrying their
    weighted mean.  Returns the fitted vector, in which each pooled run is
    constant at the weighted mean of its members.

    Parameters
    ----------
    y : array_like
        Values to project.
    weights : array_like
        Strictly positive weights, same length as y.
    """
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.shape != w.shape or y.ndim != 1:
        raise ValueError("y and weights must be 1-d and the same length")
    if np.any(w <= 0):
        raise ValueError("weights must be > 0")
    n = y.size
    # Block stacks: fitted value, total weight, member count.
    vals = np.empty(n)
    wsum = np.empty(n)
    size = np.empty(n, dtype=np.intp)
    top = 0
    for i in range(n):
        vals[top] = y[i]
        wsum[top] = w[i]
        size[top] = 1
        top += 1
        while top > 1 and vals[top - 2] > vals[top - 1]:
            tw = wsum[top - 2] + wsum[top - 1]
            vals[top - 2] = (vals[top - 2] * wsum[top - 2] + vals[top - 1] * wsum[top - 1]) / tw
            wsum[top - 2] = tw
            size[top - 2] += size[top - 1]
            top -= 1
    return np.repeat(vals[:top], size[:top])


def split_sum_of_squares(y, weights, n1):
    """Split the weighted SSE about the global mean at position ``n1``.

    Returns ``(left_sse, right_sse, cross)`` where the parts are the weighted
    SSEs of y[:n1] and y[n1:] about their own weighted means and

        cross = W_L * W_R / (W_L + W_R) * (mean_L - mean_R)**2.

    The three terms sum to the total weighted SSE about the global weighted
    mean; an empty side contributes zero and a zero cross term.
    """
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.shape != w.shape or y.ndim != 1:
        raise ValueError("y and weights must be 1-d and the same length")
    if not 0 <= n1 <= y.size:
        raise ValueError("split point outside 0..len(y)")
    left_sse = weighted_sse(y[:n1], w[:n1])
    right_sse = weighted_sse(y[n1:], w[n1:])
    if n1 == 0 or n1 == y.size:
        return left_sse, right_sse, 0.0
    wl = float(np.sum(w[:n1]))
    wr = float(np.sum(w[n1:]))
    ml = float(np.sum(w[:n1] * y[:n1]) / wl)
    mr = float(np.sum(w[n1:] * y[n1:]) / wr)
    cross = wl * wr / (wl + wr) * (ml - mr) ** 2
    return left_sse, right_sse, cross
