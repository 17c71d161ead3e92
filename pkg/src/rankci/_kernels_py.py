"""Pure-Python fallbacks for the hot enumeration and DP kernels.

The compiled module ``rankci._kernels`` implements the same three entry
points with identical semantics; ``rankci.kernels`` picks whichever is
available at import time.  These fallbacks are written for clarity and
keep exhaustive enumeration practical up to n around 16; the compiled
backend is recommended beyond that.
"""

import numpy as np

AGG_SUM = 0
AGG_MAX = 1


def masks_union(score, agg, crit_by_eq, smin, emax, use_filter=1):
    """Test every multi-block gap mask and union unrejected block spans.

    score : (n, n) float array, score[s, e] = block s..e contribution
    agg : AGG_SUM to add block scores, AGG_MAX to take their maximum
    crit_by_eq : length-n critical values indexed by equality count
    smin, emax : length-n integer arrays of current 0-based interval
        endpoints, updated in place; must be element-wise monotone
        non-decreasing (true for any union of block spans over a
        pointwise start, which is how every caller builds them)
    use_filter : skip hypotheses that cannot enlarge any interval
        (output-neutral either way; 0 mainly serves equivalence tests)

    Masks run over 1..2**(n-1)-1: bit g-1 set places a gap between
    sorted positions g-1 and g (0-based).  Mask 0 (the top hypothesis)
    is the caller's job.  A hypothesis is skipped unless some block
    would extend a current interval; by monotonicity of smin/emax that
    is an O(1) check per block: s < smin[e] or e > emax[s].
    """
    n = len(smin)
    if n == 1:
        return
    sc = score.tolist()
    crit = crit_by_eq.tolist()
    lo = list(map(int, smin))
    hi = list(map(int, emax))
    cap = max(crit)
    for mask in range(1, 1 << (n - 1)):
        stat = 0.0
        significant = not use_filter
        blocks = []
        s = 0
        m = mask
        while m:
            g = (m & -m).bit_length()
            m &= m - 1
            e = g - 1
            v = sc[s][e]
            if agg == AGG_SUM:
                stat += v
            elif v > stat:
                stat = v
            if stat > cap:
                break
            blocks.append((s, e))
            if s < lo[e] or e > hi[s]:
                significant = True
            s = g
        else:
            e = n - 1
            v = sc[s][e]
            if agg == AGG_SUM:
                stat += v
            elif v > stat:
                stat = v
            if stat > cap:
                continue
            blocks.append((s, e))
            if s < lo[e] or e > hi[s]:
                significant = True
            if not significant:
                continue
            if stat <= crit[n - len(blocks)]:
                for bs, be in blocks:
                    for c in range(bs, be + 1):
                        if bs < lo[c]:
                            lo[c] = bs
                        if be > hi[c]:
                            hi[c] = be
    smin[:] = lo
    emax[:] = hi


def min_contrib_fill(adjusted):
    """DP over ranges: minimum summed block score over all consecutive splits.

    adjusted : (n, n) float array, adjusted[i, j] = score of block i..j
        (already including any per-equality adjustment)

    Returns the (n, n) matrix mc with mc[i, j] = min over all ordered
    partitions of i..j into consecutive blocks of the summed adjusted
    block scores; diagonal 0 is NOT forced (a singleton block scores
    adjusted[i, i], which callers set to 0).  Lower triangle is unused.
    """
    n = adjusted.shape[0]
    mc = np.zeros((n, n))
    np.fill_diagonal(mc, np.diag(adjusted))
    for d in range(1, n):
        for i in range(n - d):
            j = i + d
            split_min = (mc[i, i:j] + mc[i + 1 : j + 1, j]).min()
            mc[i, j] = min(adjusted[i, j], split_min)
    return mc


def ordered_partitions_union(w, wy, wyy_total, assign, nblocks, crit_by_eq, smin, emax):
    """Union pass over arbitrary ordered set partitions (the small-n oracle).

    w, wy : per-center precision weights and weighted observations
        (sorted order)
    wyy_total : sum of w*y*y over all centers
    assign : (P, n) integer array; assign[r, c] = block position of
        center c in partition r (block positions 0..nblocks[r]-1, every
        block non-empty)
    nblocks : length-P block counts
    crit_by_eq, smin, emax : as in masks_union

    The statistic of a partition is its order-constrained minimum
    weighted SSE: within-block SSE plus the isotonic cost of pooling
    block means that violate the partition's own order.
    """
    n = len(smin)
    wl = list(map(float, w))
    wyl = list(map(float, wy))
    crit = crit_by_eq.tolist()
    lo = list(map(int, smin))
    hi = list(map(int, emax))
    P = assign.shape[0]
    for r in range(P):
        nb = int(nblocks[r])
        row = assign[r].tolist()
        sizes = [0] * nb
        for c in range(n):
            sizes[row[c]] += 1
        starts = [0] * nb
        acc = 0
        for b in range(nb):
            starts[b] = acc
            acc += sizes[b]
        significant = False
        for c in range(n):
            b = row[c]
            if starts[b] < lo[c] or starts[b] + sizes[b] - 1 > hi[c]:
                significant = True
                break
        if not significant:
            continue
        W = [0.0] * nb
        S = [0.0] * nb
        for c in range(n):
            b = row[c]
            W[b] += wl[c]
            S[b] += wyl[c]
        within = wyy_total
        means = [0.0] * nb
        for b in range(nb):
            means[b] = S[b] / W[b]
            within -= S[b] * means[b]
        if within < 0.0:
            within = 0.0
        # Isotonic cost of the block means under the partition's order:
        # pool adjacent blocks while a fitted value decreases.
        pv = [0.0] * nb
        pw = [0.0] * nb
        pc = [0] * nb
        top = 0
        for b in range(nb):
            pv[top] = means[b]
            pw[top] = W[b]
            pc[top] = 1
            top += 1
            while top > 1 and pv[top - 2] > pv[top - 1]:
                tw = pw[top - 2] + pw[top - 1]
                pv[top - 2] = (pv[top - 2] * pw[top - 2] + pv[top - 1] * pw[top - 1]) / tw
                pw[top - 2] = tw
                pc[top - 2] += pc[top - 1]
                top -= 1
        extra = 0.0
        b = 0
        for t in range(top):
            f = pv[t]
            for _ in range(pc[t]):
                d = means[b] - f
                extra += W[b] * d * d
                b += 1
        lr = within + extra
        if lr <= crit[n - nb]:
            for c in range(n):
                b = row[c]
                s = starts[b]
                e = s + sizes[b] - 1
                if s < lo[c]:
                    lo[c] = s
                if e > hi[c]:
                    hi[c] = e
    smin[:] = lo
    emax[:] = hi
