# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernels: gap-mask enumeration, the range DP, and the
ordered-set-partition union pass.  Semantics match rankci._kernels_py."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

AGG_SUM = 0
AGG_MAX = 1


def masks_union(double[:, ::1] score, int agg, double[::1] crit_by_eq,
                cnp.int64_t[::1] smin, cnp.int64_t[::1] emax, int use_filter=1):
    cdef Py_ssize_t n = smin.shape[0]
    if n == 1:
        return
    cdef unsigned long long mask, m, total = 1ULL << (n - 1)
    cdef Py_ssize_t s, e, g, c, b, nblocks
    cdef double stat, v, cap
    cdef int significant, pruned
    cdef cnp.int64_t[::1] bs = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] be = np.empty(n, dtype=np.int64)
    cap = crit_by_eq[0]
    for s in range(1, n):
        if crit_by_eq[s] > cap:
            cap = crit_by_eq[s]
    for mask in range(1, total):
        stat = 0.0
        significant = 0 if use_filter else 1
        pruned = 0
        nblocks = 0
        s = 0
        m = mask
        for g in range(1, n):
            if m & 1ULL:
                e = g - 1
                v = score[s, e]
                if agg == 0:
                    stat += v
                elif v > stat:
                    stat = v
                if stat > cap:
                    pruned = 1
                    break
                bs[nblocks] = s
                be[nblocks] = e
                if s < smin[e] or e > emax[s]:
                    significant = 1
                nblocks += 1
                s = g
            m >>= 1ULL
        if pruned:
            continue
        e = n - 1
        v = score[s, e]
        if agg == 0:
            stat += v
        elif v > stat:
            stat = v
        if stat > cap:
            continue
        bs[nblocks] = s
        be[nblocks] = e
        if s < smin[e] or e > emax[s]:
            significant = 1
        nblocks += 1
        if not significant:
            continue
        if stat <= crit_by_eq[n - nblocks]:
            for b in range(nblocks):
                for c in range(bs[b], be[b] + 1):
                    if bs[b] < smin[c]:
                        smin[c] = bs[b]
                    if be[b] > emax[c]:
                        emax[c] = be[b]


def min_contrib_fill(double[:, ::1] adjusted):
    cdef Py_ssize_t n = adjusted.shape[0]
    out = np.zeros((n, n))
    cdef double[:, ::1] mc = out
    cdef Py_ssize_t d, i, j, m
    cdef double best, v
    for i in range(n):
        mc[i, i] = adjusted[i, i]
    for d in range(1, n):
        for i in range(n - d):
            j = i + d
            best = adjusted[i, j]
            for m in range(i, j):
                v = mc[i, m] + mc[m + 1, j]
                if v < best:
                    best = v
            mc[i, j] = best
    return out


def ordered_partitions_union(double[::1] w, double[::1] wy, double wyy_total,
                             cnp.int8_t[:, ::1] assign, cnp.int8_t[::1] nblocks,
                             double[::1] crit_by_eq,
                             cnp.int64_t[::1] smin, cnp.int64_t[::1] emax):
    cdef Py_ssize_t n = smin.shape[0]
    cdef Py_ssize_t P = assign.shape[0]
    cdef Py_ssize_t r, c, b, nb, top, t, k
    cdef Py_ssize_t s, e
    cdef double within, extra, lr, tw, f, dd
    cdef int significant
    cdef cnp.int64_t[::1] sizes = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] starts = np.empty(n, dtype=np.int64)
    cdef double[::1] W = np.empty(n)
    cdef double[::1] S = np.empty(n)
    cdef double[::1] means = np.empty(n)
    cdef double[::1] pv = np.empty(n)
    cdef double[::1] pw = np.empty(n)
    cdef cnp.int64_t[::1] pc = np.empty(n, dtype=np.int64)
    for r in range(P):
        nb = nblocks[r]
        for b in range(nb):
            sizes[b] = 0
        for c in range(n):
            sizes[assign[r, c]] += 1
        k = 0
        for b in range(nb):
            starts[b] = k
            k += sizes[b]
        significant = 0
        for c in range(n):
            b = assign[r, c]
            if starts[b] < smin[c] or starts[b] + sizes[b] - 1 > emax[c]:
                significant = 1
                break
        if not significant:
            continue
        for b in range(nb):
            W[b] = 0.0
            S[b] = 0.0
        for c in range(n):
            b = assign[r, c]
            W[b] += w[c]
            S[b] += wy[c]
        within = wyy_total
        for b in range(nb):
            means[b] = S[b] / W[b]
            within -= S[b] * means[b]
        if within < 0.0:
            within = 0.0
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
            for k in range(pc[t]):
                dd = means[b] - f
                extra += W[b] * dd * dd
                b += 1
        lr = within + extra
        if lr <= crit_by_eq[n - nb]:
            for c in range(n):
                b = assign[r, c]
                s = starts[b]
                e = s + sizes[b] - 1
                if s < smin[c]:
                    smin[c] = s
                if e > emax[c]:
                    emax[c] = e
