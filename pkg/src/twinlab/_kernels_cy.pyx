# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled contraction kernels.

Semantics are defined by ``_kernels_py``: every function here must be
bit-identical to its numpy twin on all inputs (the test suite compares
them directly).  The wins are the G(n,p) pair loop (one draw per pair
instead of one per endpoint), the all-pairs scans, and the contraction
scatter — all popcount-bound inner loops.
"""

import numpy as np

cimport cython
from libc.stdint cimport int64_t, uint64_t

cdef extern from *:
    """
    #define POPCNT64(x) __builtin_popcountll(x)
    #define CTZ64(x) __builtin_ctzll(x)
    """
    int POPCNT64(unsigned long long x) nogil
    int CTZ64(unsigned long long x) nogil

U64 = np.uint64

cdef uint64_t _GOLD = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t _MIX1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t _MIX2 = <uint64_t>0x94D049BB133111EB


cdef inline uint64_t _sm64(uint64_t seed, uint64_t rank) nogil:
    cdef uint64_t z = seed + (rank + 1) * _GOLD
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


def words_for(n: int) -> int:
    return (n + 63) >> 6


def splitmix64(seed, ranks):
    """Vector of draws for the given counter values (uint64 in/out)."""
    cdef uint64_t s = <uint64_t>(int(seed) & ((1 << 64) - 1))
    r = np.ascontiguousarray(ranks, dtype=np.uint64)
    shape = r.shape
    r = r.reshape(-1)
    out = np.empty(r.size, dtype=np.uint64)
    cdef uint64_t[::1] rv = r
    cdef uint64_t[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(rv.shape[0]):
            ov[i] = _sm64(s, rv[i])
    return out.reshape(shape)


def draw_threshold(p: float) -> int:
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return 1 << 64
    return int(p * 2.0 ** 64)


def _pack_bits(bits, W):
    raw = np.packbits(bits, bitorder="little")
    out = np.zeros(W * 8, dtype=np.uint8)
    out[: raw.size] = raw
    return out.view(np.uint64)


def unpack_words(words, n: int):
    return np.unpackbits(np.asarray(words).view(np.uint8),
                         bitorder="little")[:n]


def popcount_words(words) -> int:
    w = np.ascontiguousarray(words, dtype=np.uint64)
    cdef uint64_t[::1] wv = w
    cdef int64_t total = 0
    cdef Py_ssize_t i
    with nogil:
        for i in range(wv.shape[0]):
            total += POPCNT64(wv[i])
    return int(total)


def pack_index_mask(indices, n: int):
    W = words_for(n)
    bits = np.zeros(n, dtype=np.uint8)
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size:
        bits[idx] = 1
    return _pack_bits(bits, W)


cdef inline uint64_t _mix_z(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


def fill_gnp(adj, n: int, p: float, seed: int) -> None:
    """G(n,p) black plane from the pinned pair-rank generator.

    Rows are generated in full (each pair drawn once per endpoint, same
    counter both times, exactly like the reference) so every write is a
    sequential row store; the counter-to-seed product is strength-reduced
    to additions along the row.
    """
    thr_obj = draw_threshold(p)
    cdef uint64_t[:, :, ::1] a = adj
    cdef Py_ssize_t nn = n, i, j
    cdef uint64_t s = <uint64_t>(int(seed) & ((1 << 64) - 1))
    cdef uint64_t thr, z1, d1, z2, cur, n2
    if thr_obj == 0:
        return
    if thr_obj >= 1 << 64:
        with nogil:
            for i in range(nn):
                for j in range(nn):
                    if j != i:
                        a[i, j >> 6, 0] |= <uint64_t>1 << (j & 63)
        return
    thr = <uint64_t>thr_obj
    n2 = <uint64_t>(2 * n)
    with nogil:
        for i in range(nn):
            # pairs (j, i) with j < i: counter j*(2n-j-1)/2 + (i-j-1);
            # consecutive j differ by n-j-2, itself dropping by 1 -- so
            # the seeded value advances by a per-step-decreasing stride
            z1 = s + <uint64_t>i * _GOLD            # j = 0: counter i-1
            d1 = <uint64_t>(nn - 2) * _GOLD         # stride at j = 0
            cur = 0
            for j in range(nn):
                if j < i:
                    if _mix_z(z1) < thr:
                        cur |= <uint64_t>1 << (j & 63)
                    z1 += d1
                    d1 -= _GOLD
                elif j > i:
                    if j == i + 1:
                        # counter i*(2n-i-1)/2, then +1 per step
                        z2 = s + (((<uint64_t>i * (n2 - <uint64_t>i - 1))
                                   >> 1) + 1) * _GOLD
                    if _mix_z(z2) < thr:
                        cur |= <uint64_t>1 << (j & 63)
                    z2 += _GOLD
                if (j & 63) == 63:
                    a[i, j >> 6, 0] = cur
                    cur = 0
            if nn & 63:
                a[i, (nn - 1) >> 6, 0] = cur


def fill_bipartite(adj, a_count: int, b_count: int, p: float,
                   seed: int) -> None:
    """G(A,B,p): pair (i, j) in A x B uses counter i*|B| + j_B."""
    thr_obj = draw_threshold(p)
    cdef uint64_t[:, :, ::1] a = adj
    cdef Py_ssize_t ac = a_count, bc = b_count, i, j
    cdef Py_ssize_t gj
    cdef uint64_t s = <uint64_t>(int(seed) & ((1 << 64) - 1))
    cdef uint64_t thr
    if thr_obj == 0:
        return
    if thr_obj >= 1 << 64:
        with nogil:
            for i in range(ac):
                for j in range(bc):
                    gj = ac + j
                    a[i, gj >> 6, 0] |= <uint64_t>1 << (gj & 63)
                    a[gj, i >> 6, 0] |= <uint64_t>1 << (i & 63)
        return
    thr = <uint64_t>thr_obj
    with nogil:
        for i in range(ac):
            for j in range(bc):
                if _sm64(s, <uint64_t>i * <uint64_t>bc + <uint64_t>j) < thr:
                    gj = ac + j
                    a[i, gj >> 6, 0] |= <uint64_t>1 << (gj & 63)
                    a[gj, i >> 6, 0] |= <uint64_t>1 << (i & 63)


cdef inline int64_t _pair_r(uint64_t[:, :, ::1] a, uint64_t[::1] alive,
                            uint64_t *colmask, Py_ssize_t u, Py_ssize_t v) nogil:
    """Merged red degree of (u, v), self bits excluded."""
    cdef Py_ssize_t W = a.shape[1], w
    cdef uint64_t nb, nr
    cdef int64_t r = 0
    cdef Py_ssize_t uw = u >> 6, vw = v >> 6
    cdef uint64_t ub = ~(<uint64_t>1 << (u & 63)), vb = ~(<uint64_t>1 << (v & 63))
    for w in range(W):
        nb = a[u, w, 0] & a[v, w, 0]
        nr = (a[u, w, 0] | a[u, w, 1] | a[v, w, 0] | a[v, w, 1]) & ~nb
        nr &= alive[w]
        if colmask != NULL:
            nr &= colmask[w]
        if w == uw:
            nr &= ub
        if w == vw:
            nr &= vb
        r += POPCNT64(nr)
    return r


def pair_red_degree(adj, alive, u: int, v: int, colmask=None) -> int:
    cdef uint64_t[:, :, ::1] a = adj
    cdef uint64_t[::1] al = alive
    cdef uint64_t[::1] cm
    if colmask is None:
        return int(_pair_r(a, al, NULL, u, v))
    cm = np.ascontiguousarray(colmask, dtype=np.uint64)
    return int(_pair_r(a, al, &cm[0], u, v))


def contract_step(adj, alive, rdeg, sizes, u: int, v: int) -> int:
    """Merge v into u in place (see the reference kernel for the exact
    update discipline); returns the merged red degree."""
    cdef uint64_t[:, :, ::1] a = adj
    cdef uint64_t[::1] al = alive
    cdef int64_t[::1] rd = rdeg
    cdef int64_t[::1] sz = sizes
    cdef Py_ssize_t W = a.shape[1], w, x, base
    cdef Py_ssize_t uu = u, vv = v
    cdef Py_ssize_t uw = uu >> 6
    cdef uint64_t ubit = <uint64_t>1 << (uu & 63)
    cdef uint64_t nb, nr, mask, gains, rloss, g
    cdef int64_t merged = 0

    al[vv >> 6] &= ~(<uint64_t>1 << (vv & 63))
    with nogil:
        for w in range(W):
            nb = a[uu, w, 0] & a[vv, w, 0]
            nr = (a[uu, w, 0] | a[uu, w, 1] | a[vv, w, 0] | a[vv, w, 1]) & ~nb
            mask = al[w]
            if w == uw:
                mask &= ~ubit
            gains = nr & ~a[uu, w, 1] & mask
            rloss = a[vv, w, 1] & mask
            base = w << 6
            g = gains
            while g:
                x = base + CTZ64(g)
                rd[x] += 1
                a[x, uw, 1] |= ubit
                a[x, uw, 0] &= ~ubit
                g &= g - 1
            g = rloss
            while g:
                rd[base + CTZ64(g)] -= 1
                g &= g - 1
            nb &= mask
            nr &= mask
            a[uu, w, 0] = nb
            a[uu, w, 1] = nr
            merged += POPCNT64(nr)
        rd[uu] = merged
        rd[vv] = -1
        sz[uu] += sz[vv]
        sz[vv] = 0
    return int(merged)


cdef inline void _repair(uint64_t b, uint64_t r, uint64_t pairmask,
                         uint64_t cols2, uint64_t *bt, uint64_t *rt) nogil:
    """Class-true word for columns lazily merged as adjacent pairs."""
    cdef uint64_t some = b | r
    cdef uint64_t bb = b & (b >> 1)
    cdef uint64_t anyb = some | (some >> 1)
    cdef uint64_t rr = anyb & ~bb
    bt[0] = (bb & pairmask) | (b & ~cols2)
    rt[0] = (rr & pairmask) | (r & ~cols2)


def bulk_adjacent_pairs(adj, alive, rdeg, sizes, pairs):
    """Contract disjoint (u, u+1) runs with lazy column repair; exact
    per-step red degrees and maxima, matrix materialized at the end."""
    cdef uint64_t[:, :, ::1] a = adj
    cdef uint64_t[::1] al = alive
    cdef int64_t[::1] rd = rdeg
    cdef int64_t[::1] sz = sizes
    p2 = np.ascontiguousarray(pairs, dtype=np.int64)
    cdef int64_t[:, ::1] pr = p2
    cdef Py_ssize_t n = a.shape[0], W = a.shape[1]
    cdef Py_ssize_t k = pr.shape[0], t, w, x, base, u, v
    merged_np = np.empty(k, dtype=np.int64)
    max_np = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] merged_out = merged_np
    cdef int64_t[::1] max_out = max_np
    pairmask_np = np.zeros(W, dtype=np.uint64)
    cols2_np = np.zeros(W, dtype=np.uint64)
    cdef uint64_t[::1] pairmask = pairmask_np
    cdef uint64_t[::1] cols2 = cols2_np
    cdef uint64_t bu, ru, bv, rv, nb, nr, mask, gains, rloss, g, bit
    cdef int64_t merged, cur
    cdef Py_ssize_t uw

    heads_np = np.zeros(n, dtype=np.uint8)
    if k:
        heads_np[np.asarray(p2)[:, 0]] = 1
    cdef unsigned char[::1] heads = heads_np

    with nogil:
        for t in range(k):
            u = pr[t, 0]
            v = pr[t, 1]
            uw = u >> 6
            bit = <uint64_t>1 << (u & 63)
            al[v >> 6] &= ~(<uint64_t>1 << (v & 63))
            merged = 0
            for w in range(W):
                _repair(a[u, w, 0], a[u, w, 1], pairmask[w], cols2[w], &bu, &ru)
                _repair(a[v, w, 0], a[v, w, 1], pairmask[w], cols2[w], &bv, &rv)
                nb = bu & bv
                nr = (bu | ru | bv | rv) & ~nb
                mask = al[w]
                if w == uw:
                    mask &= ~bit
                gains = nr & ~ru & mask
                rloss = rv & mask
                base = w << 6
                g = gains
                while g:
                    rd[base + CTZ64(g)] += 1
                    g &= g - 1
                g = rloss
                while g:
                    rd[base + CTZ64(g)] -= 1
                    g &= g - 1
                merged += POPCNT64(nr & mask)
            rd[u] = merged
            rd[v] = -1
            sz[u] += sz[v]
            sz[v] = 0
            merged_out[t] = merged
            cur = rd[0]
            for x in range(1, n):
                if rd[x] > cur:
                    cur = rd[x]
            max_out[t] = cur
            pairmask[uw] |= bit
            cols2[uw] |= bit | (bit << 1)

        # materialize every surviving row to its class-true value
        for x in range(n):
            if not (al[x >> 6] >> (x & 63)) & 1:
                continue
            uw = x >> 6
            bit = <uint64_t>1 << (x & 63)
            for w in range(W):
                bu = a[x, w, 0]
                ru = a[x, w, 1]
                if heads[x]:
                    bv = a[x + 1, w, 0]
                    rv = a[x + 1, w, 1]
                    nb = bu & bv
                    ru = (bu | ru | bv | rv) & ~nb
                    bu = nb
                _repair(bu, ru, pairmask[w], cols2[w], &nb, &nr)
                nb &= al[w]
                nr &= al[w]
                if w == uw:
                    nb &= ~bit
                    nr &= ~bit
                a[x, w, 0] = nb
                a[x, w, 1] = nr
    return merged_np, max_np


def eval_pairs(adj, alive, us, vs, colmask=None):
    """Vectorized pair_red_degree over candidate arrays (no mutation)."""
    cdef uint64_t[:, :, ::1] a = adj
    u2 = np.ascontiguousarray(us, dtype=np.int64)
    v2 = np.ascontiguousarray(vs, dtype=np.int64)
    cdef int64_t[::1] uv = u2
    cdef int64_t[::1] vv = v2
    cdef Py_ssize_t k = uv.shape[0], i
    out = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef uint64_t[::1] mk
    mask_np = (np.asarray(alive) if colmask is None
               else np.asarray(alive) & np.asarray(colmask))
    mask_np = np.ascontiguousarray(mask_np, dtype=np.uint64)
    mk = mask_np
    # alive (and colmask when given) are folded into one mask; _pair_r's
    # alive argument is that mask with no extra column filter
    with nogil:
        for i in range(k):
            ov[i] = _pair_r(a, mk, NULL, uv[i], vv[i])
    return out


def scan_low_pairs(adj, alive, rows, colmask, threshold):
    """Exhaustive pair scan over ``rows`` under ``colmask``; returns all
    pairs at or below threshold plus per-row above-threshold runner-ups.

    The quadratic sweep is tiled: a block of u-rows stays cache-resident
    while every partner row streams past once per block.  Per-row partner
    order is still ascending (runner-up ties resolve identically), and
    hits are re-sorted into the reference row-major emission order.
    """
    cdef uint64_t[:, :, ::1] a = adj
    r2 = np.ascontiguousarray(rows, dtype=np.int64)
    cdef int64_t[::1] rv = r2
    cdef Py_ssize_t k = rv.shape[0], i, j, ib, iend
    cdef Py_ssize_t TB = 16
    cdef double thr = float(threshold)
    mask_np = np.ascontiguousarray(np.asarray(alive) & np.asarray(colmask),
                                   dtype=np.uint64)
    cdef uint64_t[::1] mk = mask_np
    best_r_np = np.full(k, -1, dtype=np.int64)
    best_v_np = np.full(k, -1, dtype=np.int64)
    cdef int64_t[::1] best_r = best_r_np
    cdef int64_t[::1] best_v = best_v_np
    cdef int64_t r
    hi_, hj_, hr_ = [], [], []
    for ib in range(0, k - 1, TB):
        iend = ib + TB
        if iend > k - 1:
            iend = k - 1
        for j in range(ib + 1, k):
            for i in range(ib, iend if iend < j else j):
                r = _pair_r(a, mk, NULL, rv[i], rv[j])
                if <double>r <= thr:
                    hi_.append(i)
                    hj_.append(j)
                    hr_.append(int(r))
                elif best_r[i] < 0 or r < best_r[i]:
                    best_r[i] = r
                    best_v[i] = rv[j]
    hi_np = np.asarray(hi_, dtype=np.int64)
    hj_np = np.asarray(hj_, dtype=np.int64)
    hr_np = np.asarray(hr_, dtype=np.int64)
    order = np.lexsort((hj_np, hi_np))
    return (r2[hi_np[order]], r2[hj_np[order]], hr_np[order],
            best_r_np, best_v_np)


def count_pairs_below(adj, alive, rows, threshold):
    """(count, min_r) over all pairs from ``rows``: r < threshold, strict."""
    cdef uint64_t[:, :, ::1] a = adj
    cdef uint64_t[::1] al = alive
    r2 = np.ascontiguousarray(rows, dtype=np.int64)
    cdef int64_t[::1] rv = r2
    cdef Py_ssize_t k = rv.shape[0], i, j
    cdef double thr = float(threshold)
    cdef int64_t total = 0, mn = -1, r
    with nogil:
        for i in range(k - 1):
            for j in range(i + 1, k):
                r = _pair_r(a, al, NULL, rv[i], rv[j])
                if <double>r < thr:
                    total += 1
                if mn < 0 or r < mn:
                    mn = r
    return int(total), int(mn)
