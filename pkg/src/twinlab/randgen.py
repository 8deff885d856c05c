"""Seeded random graphs: G(n,p), bipartite G(A,B,p), and random cographs.

Reproducibility contract
------------------------
All randomness comes from one counter-based generator: draw k of stream
``seed`` is ``splitmix64(seed + (k+1) * 0x9E3779B97F4A7C15)`` (the
standard finalizer; see ``_kernels_py.splitmix64``).  The unordered pair
{u,v}, 1 <= u < v <= n, consumes the draw at its lexicographic rank

    rank(u,v) = (u-1)(2n-u)/2 + (v-u-1)          [0-based]

and is an edge iff the draw is < floor(p * 2^64).  Bipartite pairs use
rank(a,b) = (a-1)|B| + (b's index in B).  The mapping is pinned so the
same (n, p, seed) yields the same graph on every backend, platform, and
iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import K
from .trigraph import Trigraph


@dataclass(frozen=True)
class RandomGraphSpec:
    n: int
    p: float
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be >= 1, got {self.n}")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"edge probability must be in [0,1], got {self.p}")


def gnp(spec: RandomGraphSpec) -> Trigraph:
    """Erdős–Rényi G(n,p): every unordered pair independently an edge."""
    if not isinstance(spec, RandomGraphSpec):
        raise TypeError("gnp takes a RandomGraphSpec")
    g = Trigraph(spec.n)
    K.fill_gnp(g.adj, spec.n, spec.p, spec.seed & ((1 << 64) - 1))
    return g


def bipartite_gnp(a_count: int, b_count: int, p: float, seed: int) -> Trigraph:
    """Random bipartite graph on sides 1..a_count and a_count+1..n.

    The result's ``side_a``/``side_b`` record the designated sides.
    """
    if a_count < 1 or b_count < 1:
        raise ValueError("both sides need at least one vertex")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"edge probability must be in [0,1], got {p}")
    n = a_count + b_count
    g = Trigraph(n)
    K.fill_bipartite(g.adj, a_count, b_count, p, seed & ((1 << 64) - 1))
    g.side_a = frozenset(range(1, a_count + 1))
    g.side_b = frozenset(range(a_count + 1, n + 1))
    return g


def random_cograph(n: int, seed: int) -> Trigraph:
    """A cograph on n vertices: random recursive unions and joins of K1.

    Split sizes and the union/join choice are driven by the pinned
    generator, one draw per internal node of the cotree.
    """
    if n < 1:
        raise ValueError(f"vertex count must be >= 1, got {n}")
    g = Trigraph(n)
    counter = 0
    stack = [(0, n - 1)]  # preorder over the cotree, 0-based label ranges
    while stack:
        lo, hi = stack.pop()
        k = hi - lo + 1
        if k == 1:
            continue
        d = int(K.splitmix64(seed, np.array([counter], dtype=np.uint64))[0])
        counter += 1
        split = lo + 1 + d % (k - 1)  # left part lo..split-1 is nonempty
        if (d >> 32) & 1:  # join instead of disjoint union
            for i in range(lo, split):
                for j in range(split, hi + 1):
                    g._set_black(i, j)
        stack.append((split, hi))
        stack.append((lo, split - 1))
    return g
