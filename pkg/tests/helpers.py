"""Shared reference implementations and sample builders for the tests.

Everything here is written independently of the library internals - plain
loops, itertools, and scipy quantiles - so agreement is evidence, not an
echo.  Keep these slow and obvious.
"""

from itertools import combinations, permutations

import numpy as np
from scipy.stats import chi2

from rankci.model import Sample


def make_sample(rng, n, equal_sigma=True, spread=2.0, sigma_lo=0.3, sigma_hi=3.0):
    y = rng.normal(0.0, spread, n)
    if equal_sigma:
        sigma = np.ones(n)
    else:
        sigma = rng.uniform(sigma_lo, sigma_hi, n)
    return Sample([f"c{i}" for i in range(n)], y, sigma)


def consecutive_partitions(lo, hi):
    """All ways to cut centers lo..hi into consecutive blocks."""
    m = hi - lo + 1
    if m <= 0:
        yield []
        return
    for ngaps in range(m):
        for gaps in combinations(range(lo + 1, hi + 1), ngaps):
            cuts = [lo, *gaps, hi + 1]
            yield [(cuts[t], cuts[t + 1] - 1) for t in range(len(cuts) - 1)]


def block_sse(y, w, s, e):
    ys = y[s : e + 1]
    ws = w[s : e + 1]
    m = (ws * ys).sum() / ws.sum()
    return float((ws * (ys - m) ** 2).sum())


def naive_ordered_cis(sample, alpha=0.05):
    """Reference sweep over all 2**(n-1) consecutive-block hypotheses.

    Critical values come straight from scipy's chi-square quantile; the
    zero-equality hypothesis has statistic 0 and is never rejected.
    """
    n = sample.n
    y = sample.y
    w = 1.0 / sample.sigma**2
    lo = list(range(n))
    hi = list(range(n))
    for ngaps in range(0, n):
        for gaps in combinations(range(1, n), ngaps):
            cuts = [0, *gaps, n]
            blocks = [(cuts[t], cuts[t + 1] - 1) for t in range(len(cuts) - 1)]
            stat = sum(block_sse(y, w, s, e) for s, e in blocks)
            k = n - len(blocks)
            crit = 0.0 if k == 0 else chi2.ppf(1.0 - alpha, k)
            if stat <= crit:
                for s, e in blocks:
                    for c in range(s, e + 1):
                        lo[c] = min(lo[c], s)
                        hi[c] = max(hi[c], e)
    return tuple((a + 1, b + 1) for a, b in zip(lo, hi))


def iter_set_partitions(items):
    """All partitions of ``items`` into non-empty unordered blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in iter_set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def naive_isotonic(values, weights):
    """Repeated merge scan until the fitted sequence is non-decreasing."""
    groups = [[v, w, 1] for v, w in zip(values, weights)]
    changed = True
    while changed:
        changed = False
        out = []
        for g in groups:
            out.append(list(g))
            while len(out) >= 2 and out[-2][0] > out[-1][0]:
                v2, w2, c2 = out.pop()
                v1, w1, c1 = out.pop()
                tw = w1 + w2
                out.append([(v1 * w1 + v2 * w2) / tw, tw, c1 + c2])
                changed = True
        groups = out
    fit = []
    for v, _, c in groups:
        fit.extend([v] * c)
    return fit


def naive_any_order_stat(sample, blocks):
    """Order-constrained minimum weighted SSE of one ordered partition."""
    y = sample.y
    w = 1.0 / sample.sigma**2
    means, weights, within = [], [], 0.0
    for blk in blocks:
        idx = list(blk)
        ww = w[idx].sum()
        m = (w[idx] * y[idx]).sum() / ww
        means.append(float(m))
        weights.append(float(ww))
        within += float((w[idx] * (y[idx] - m) ** 2).sum())
    fit = naive_isotonic(means, weights)
    extra = sum(ww * (m - f) ** 2 for m, ww, f in zip(means, weights, fit))
    return within + extra


def naive_oracle_cis(sample, alpha=0.05):
    """Reference union over every ordered set partition, misordered included."""
    n = sample.n
    lo = list(range(n))
    hi = list(range(n))
    for part in iter_set_partitions(range(n)):
        for order in permutations(part):
            stat = naive_any_order_stat(sample, order)
            k = n - len(order)
            crit = 0.0 if k == 0 else chi2.ppf(1.0 - alpha, k)
            if stat <= crit:
                pos = 0
                spans = []
                for blk in order:
                    spans.append((pos, pos + len(blk) - 1))
                    pos += len(blk)
                for blk, (s, e) in zip(order, spans):
                    for c in blk:
                        lo[c] = min(lo[c], s)
                        hi[c] = max(hi[c], e)
    return tuple((a + 1, b + 1) for a, b in zip(lo, hi))


def naive_tukey_pairwise(sample, q):
    n = sample.n
    y = sample.y
    s2 = sample.sigma**2
    out = []
    for i in range(n):
        below = sum(
            1
            for j in range(n)
            if y[j] < y[i] and abs(y[i] - y[j]) / np.sqrt(s2[i] + s2[j]) > q
        )
        above = sum(
            1
            for j in range(n)
            if y[j] > y[i] and abs(y[i] - y[j]) / np.sqrt(s2[i] + s2[j]) > q
        )
        out.append((1 + below, n - above))
    return tuple(out)
