"""Pure-numpy contraction kernels.

This module is the semantic reference for the compiled backend
(``_kernels_cy``): both must produce bit-identical results for every
function defined here.  The compiled module exists only because two of
these loops dominate wall time at n ~ 10^5; everything else is plain
vectorized numpy.

State layout shared by all kernels
----------------------------------
``adj``    uint64 array of shape (n, W, 2) with W = ceil(n/64).
           ``adj[v, :, 0]`` packs the black adjacency row of vertex v,
           ``adj[v, :, 1]`` the red row.  Bit j of word w is vertex
           ``64*w + j`` (little-endian within the word).  The two planes
           of a word pair are interleaved so a single-column update
           touches one cache line.
``alive``  uint64 array of shape (W,): bit set iff the vertex label is
           alive.  Rows and columns of dead vertices are *not* cleaned;
           every read masks with ``alive`` instead (lazy tombstoning).
``rdeg``   int64 array (n,): current red degree per alive label, -1 for
           dead labels.  Maintained incrementally by the contraction
           kernels.
``sizes``  int64 array (n,): number of original vertices merged into the
           label, 0 for dead labels.

All vertex indices at this layer are 0-based.  Contraction merges v into
u and requires u < v (the surviving label is the smaller one).
"""

from __future__ import annotations

import numpy as np

U64 = np.uint64
_MASK64 = (1 << 64) - 1

# splitmix64 constants
_GOLD = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_S30 = U64(30)
_S27 = U64(27)
_S31 = U64(31)
_S1 = U64(1)


def words_for(n: int) -> int:
    return (n + 63) >> 6


def splitmix64(seed: int, ranks: np.ndarray) -> np.ndarray:
    """The pinned counter-based generator: draw k of stream ``seed``.

    z = (seed + (k+1) * 0x9E3779B97F4A7C15) mod 2^64, then the standard
    splitmix64 finalizer.  ``ranks`` is a uint64 array of counter values.
    """
    z = U64(seed & _MASK64) + (ranks + _S1) * _GOLD
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def draw_threshold(p: float) -> int:
    """Inclusion threshold: a pair is an edge iff its draw < floor(p * 2^64)."""
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return 1 << 64
    return int(p * 2.0 ** 64)


def _pack_bits(bits: np.ndarray, W: int) -> np.ndarray:
    """Pack a boolean/uint8 vector into W little-endian uint64 words."""
    raw = np.packbits(bits, bitorder="little")
    out = np.zeros(W * 8, dtype=np.uint8)
    out[: raw.size] = raw
    return out.view(np.uint64)


def unpack_words(words: np.ndarray, n: int) -> np.ndarray:
    """Expand packed words to a uint8 0/1 vector of length n."""
    return np.unpackbits(words.view(np.uint8), bitorder="little")[:n]


def popcount_words(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum(dtype=np.int64))


def pack_index_mask(indices, n: int) -> np.ndarray:
    """Bit mask (W words) with the given 0-based indices set."""
    W = words_for(n)
    bits = np.zeros(n, dtype=np.uint8)
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size:
        bits[idx] = 1
    return _pack_bits(bits, W)


def fill_gnp(adj: np.ndarray, n: int, p: float, seed: int) -> None:
    """Fill the black plane with G(n,p) drawn from the pinned generator.

    The draw for pair {i,j} (i<j) sits at counter index
    rank = i*(2n-i-1)/2 + (j-i-1), so any generation order yields the
    same graph.  This fallback generates full rows (each pair is drawn
    twice, once per endpoint) to keep writes sequential.
    """
    W = adj.shape[1]
    thr = draw_threshold(p)
    if thr == 0:
        return
    if thr >= 1 << 64:
        full = np.ones(n, dtype=np.uint8)
        for i in range(n):
            full[i] = 0
            adj[i, :, 0] = _pack_bits(full, W)
            full[i] = 1
        return
    t = U64(thr)
    j = np.arange(n, dtype=np.uint64)
    n2 = U64(2 * n)
    for i in range(n):
        iu = U64(i)
        lo = np.minimum(iu, j)
        hi = np.maximum(iu, j)
        rank = (lo * (n2 - lo - _S1) >> _S1) + (hi - lo - _S1)
        bits = (splitmix64(seed, rank) < t).astype(np.uint8)
        bits[i] = 0
        adj[i, :, 0] = _pack_bits(bits, W)


def fill_bipartite(adj: np.ndarray, a_count: int, b_count: int, p: float,
                   seed: int) -> None:
    """G(A,B,p) on labels [0, a_count) x [a_count, a_count+b_count).

    Pair (i in A, j in B) uses counter index i*b_count + (j - a_count).
    """
    n = a_count + b_count
    W = adj.shape[1]
    thr = draw_threshold(p)
    if thr == 0:
        return
    if thr >= 1 << 64:
        for i in range(a_count):
            bits = np.zeros(n, dtype=np.uint8)
            bits[a_count:] = 1
            adj[i, :, 0] = _pack_bits(bits, W)
        for jj in range(a_count, n):
            bits = np.zeros(n, dtype=np.uint8)
            bits[:a_count] = 1
            adj[jj, :, 0] = _pack_bits(bits, W)
        return
    t = U64(thr)
    bc = U64(b_count)
    jb = np.arange(b_count, dtype=np.uint64)
    for i in range(a_count):
        rank = U64(i) * bc + jb
        row = np.zeros(n, dtype=np.uint8)
        row[a_count:] = splitmix64(seed, rank) < t
        adj[i, :, 0] = _pack_bits(row, W)
    ia = np.arange(a_count, dtype=np.uint64)
    for jj in range(b_count):
        rank = ia * bc + U64(jj)
        row = np.zeros(n, dtype=np.uint8)
        row[:a_count] = splitmix64(seed, rank) < t
        adj[a_count + jj, :, 0] = _pack_bits(row, W)


def _bit_of(v: int) -> np.uint64:
    return U64(1 << (v & 63))


def pair_red_degree(adj, alive, u: int, v: int, colmask=None) -> int:
    """Red degree the merged class would have after contracting u,v.

    Counts alive labels w (excluding u and v) whose relation to the pair
    is mixed: not black to both, not absent from both.  ``colmask``
    restricts the counted columns (used for bipartite red degrees).
    """
    bu = adj[u, :, 0]
    ru = adj[u, :, 1]
    bv = adj[v, :, 0]
    rv = adj[v, :, 1]
    nb = bu & bv
    nr = (bu | ru | bv | rv) & ~nb
    nr = nr & alive if colmask is None else nr & alive & colmask
    nr = nr.copy()
    nr[u >> 6] &= ~_bit_of(u)
    nr[v >> 6] &= ~_bit_of(v)
    return popcount_words(nr)


def contract_step(adj, alive, rdeg, sizes, u: int, v: int) -> int:
    """Merge v into u in place; returns the merged class's red degree.

    Row u is rebuilt exactly; other rows receive only the column-u
    updates they need (red gains — black losses are a subset of red
    gains, and column v is left stale because v is dead and every read
    masks with ``alive``).  ``rdeg`` is updated for all affected labels.
    """
    n = adj.shape[0]
    bu = adj[u, :, 0]
    ru = adj[u, :, 1]
    bv = adj[v, :, 0]
    rv = adj[v, :, 1]
    nb = bu & bv
    nr = (bu | ru | bv | rv) & ~nb

    alive[v >> 6] &= ~_bit_of(v)
    mask = alive.copy()
    mask[u >> 6] &= ~_bit_of(u)

    gains = nr & ~ru & mask
    rloss = rv & mask

    gb = unpack_words(gains, n)
    rdeg += gb
    rdeg -= unpack_words(rloss, n)

    idx = np.nonzero(gb)[0]
    if idx.size:
        wu = u >> 6
        bitu = _bit_of(u)
        adj[idx, wu, 1] |= bitu
        adj[idx, wu, 0] &= ~bitu

    adj[u, :, 0] = nb & mask
    adj[u, :, 1] = nr & mask
    merged = popcount_words(nr & mask)
    rdeg[u] = merged
    rdeg[v] = -1
    sizes[u] += sizes[v]
    sizes[v] = 0
    return merged


def _repair_row(b, r, pairmask, cols2):
    """Class-true (black, red) rows given lazily merged adjacent pairs.

    ``pairmask`` holds the even bit of every pair column already merged
    in the current bulk run; ``cols2 = pairmask | pairmask << 1``.  For
    such a column pair the true relation of the class is both-black /
    neither / mixed over the two original columns, which is computable
    word-parallel because the two bits are adjacent.
    """
    some = b | r
    bb = b & (b >> _S1)
    anyb = some | (some >> _S1)
    rr = anyb & ~bb
    bt = (bb & pairmask) | (b & ~cols2)
    rt = (rr & pairmask) | (r & ~cols2)
    return bt, rt


def bulk_adjacent_pairs(adj, alive, rdeg, sizes, pairs: np.ndarray):
    """Contract a run of disjoint (u, u+1) pairs (u even) without scatter.

    Column updates for these merges would be the hottest loop of the
    whole package (a fresh pair contraction turns ~2pq*n columns red),
    so instead of writing them per step, rows are kept stale and every
    read repairs the already-merged pair columns with `_repair_row`; the
    full matrix is materialized once at the end.  Red degrees and the
    per-step maxima are exact throughout.

    Returns (merged_rdeg, max_rdeg) int64 arrays, one entry per pair.
    """
    n = adj.shape[0]
    W = adj.shape[1]
    k = len(pairs)
    merged_out = np.empty(k, dtype=np.int64)
    max_out = np.empty(k, dtype=np.int64)
    pairmask = np.zeros(W, dtype=np.uint64)
    cols2 = np.zeros(W, dtype=np.uint64)

    for t in range(k):
        u = int(pairs[t, 0])
        v = int(pairs[t, 1])
        bu, ru = _repair_row(adj[u, :, 0], adj[u, :, 1], pairmask, cols2)
        bv, rv = _repair_row(adj[v, :, 0], adj[v, :, 1], pairmask, cols2)
        nb = bu & bv
        nr = (bu | ru | bv | rv) & ~nb

        alive[v >> 6] &= ~_bit_of(v)
        mask = alive.copy()
        mask[u >> 6] &= ~_bit_of(u)

        gains = nr & ~ru & mask
        rloss = rv & mask
        rdeg += unpack_words(gains, n)
        rdeg -= unpack_words(rloss, n)

        nr &= mask
        merged = popcount_words(nr)
        rdeg[u] = merged
        rdeg[v] = -1
        sizes[u] += sizes[v]
        sizes[v] = 0
        merged_out[t] = merged
        max_out[t] = rdeg.max()

        bit = _bit_of(u)
        pairmask[u >> 6] |= bit
        cols2[u >> 6] |= bit | (bit << _S1)

    # materialize: fold every surviving row to its class-true value
    heads = np.zeros(n, dtype=bool)
    hp = pairs[:, 0].astype(np.int64)
    heads[hp] = True
    av = unpack_words(alive, n)
    for x in np.nonzero(av)[0]:
        xi = int(x)
        b = adj[xi, :, 0]
        r = adj[xi, :, 1]
        if heads[xi]:
            b2 = adj[xi + 1, :, 0]
            r2 = adj[xi + 1, :, 1]
            bb = b & b2
            rr = (b | r | b2 | r2) & ~bb
            b, r = bb, rr
        bt, rt = _repair_row(b, r, pairmask, cols2)
        bt &= alive
        rt &= alive
        bt[xi >> 6] &= ~_bit_of(xi)
        rt[xi >> 6] &= ~_bit_of(xi)
        adj[xi, :, 0] = bt
        adj[xi, :, 1] = rt
    return merged_out, max_out


def eval_pairs(adj, alive, us, vs, colmask=None) -> np.ndarray:
    """Vectorized pair_red_degree over candidate arrays (no mutation)."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    bu = adj[us, :, 0]
    ru = adj[us, :, 1]
    bv = adj[vs, :, 0]
    rv = adj[vs, :, 1]
    nb = bu & bv
    nr = (bu | ru | bv | rv) & ~nb
    nr &= alive if colmask is None else alive & colmask
    k = np.arange(len(us))
    nr[k, us >> 6] &= ~(_S1 << (us.astype(np.uint64) & U64(63)))
    nr[k, vs >> 6] &= ~(_S1 << (vs.astype(np.uint64) & U64(63)))
    return np.bitwise_count(nr).sum(axis=1, dtype=np.int64)


def scan_low_pairs(adj, alive, rows: np.ndarray, colmask, threshold: int):
    """Exhaustive pair scan over ``rows`` with columns masked by ``colmask``.

    Returns (hit_u, hit_v, hit_r) for every pair with red degree <=
    threshold, plus per-row runner-up arrays (best_r[i], best_v[i]) =
    the smallest strictly-above-threshold pair seen for rows[i] (ties by
    smaller partner), best_r = -1 where none.  The runner-ups let a
    caller top up a shortfall deterministically without a second scan.
    """
    rows = np.asarray(rows, dtype=np.int64)
    k = rows.size
    mask = alive & colmask
    hu: list[np.ndarray] = []
    hv: list[np.ndarray] = []
    hr: list[np.ndarray] = []
    best_r = np.full(k, -1, dtype=np.int64)
    best_v = np.full(k, -1, dtype=np.int64)
    for i in range(k - 1):
        u = int(rows[i])
        vs = rows[i + 1:]
        bu = adj[u, :, 0]
        ru = adj[u, :, 1]
        bv = adj[vs, :, 0]
        rv = adj[vs, :, 1]
        nb = bu & bv
        nr = (bu | ru | bv | rv) & ~nb
        nr &= mask
        # u and the partners are row labels; if they fall inside colmask
        # their self bits must not count
        nr[:, u >> 6] &= ~_bit_of(u)
        kk = np.arange(vs.size)
        nr[kk, vs >> 6] &= ~(_S1 << (vs.astype(np.uint64) & U64(63)))
        r = np.bitwise_count(nr).sum(axis=1, dtype=np.int64)
        low = r <= threshold
        if low.any():
            hu.append(np.full(int(low.sum()), u, dtype=np.int64))
            hv.append(vs[low])
            hr.append(r[low])
        hi = ~low
        if hi.any():
            j = int(np.flatnonzero(hi)[np.argmin(r[hi])])
            best_r[i] = r[j]
            best_v[i] = vs[j]
    if hu:
        return (np.concatenate(hu), np.concatenate(hv), np.concatenate(hr),
                best_r, best_v)
    z = np.zeros(0, dtype=np.int64)
    return z, z.copy(), z.copy(), best_r, best_v


def count_pairs_below(adj, alive, rows: np.ndarray, threshold: int):
    """(count, min_r) over all pairs from ``rows``: r < threshold, strict."""
    rows = np.asarray(rows, dtype=np.int64)
    total = 0
    mn = -1
    for i in range(rows.size - 1):
        u = int(rows[i])
        vs = rows[i + 1:]
        bu = adj[u, :, 0]
        ru = adj[u, :, 1]
        bv = adj[vs, :, 0]
        rv = adj[vs, :, 1]
        nb = bu & bv
        nr = (bu | ru | bv | rv) & ~nb
        nr &= alive
        nr[:, u >> 6] &= ~_bit_of(u)
        kk = np.arange(vs.size)
        nr[kk, vs >> 6] &= ~(_S1 << (vs.astype(np.uint64) & U64(63)))
        r = np.bitwise_count(nr).sum(axis=1, dtype=np.int64)
        total += int((r < threshold).sum())
        m = int(r.min()) if r.size else -1
        if mn < 0 or (m >= 0 and m < mn):
            mn = m
    return total, mn
