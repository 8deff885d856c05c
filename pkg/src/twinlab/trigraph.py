"""Trigraphs with exact contraction and quotient semantics.

A trigraph carries two disjoint symmetric edge relations: black (ordinary
edges) and red (error edges created by contractions).  Contracting u,v
merges them into the smaller label; another vertex x ends up black to the
merged class iff it was black to both, non-adjacent iff to neither, and
red otherwise — in particular red never reverts to black.

Vertices are labelled 1..n externally.  Dead (merged-away) labels are
tombstoned, never renumbered, so contraction sequences written to disk
replay exactly.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from ._backend import K


class ParseError(ValueError):
    """Raised on malformed graph/sequence files; carries the line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class VertexPartition:
    """Pairwise-disjoint nonempty blocks of vertex labels; may be partial.

    Vertices not covered by any block are treated as implicit singletons:
    ``completed(universe)`` returns the full canonical partition, blocks
    ordered by smallest member.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[Iterable[int]]):
        seen: set[int] = set()
        out = []
        for b in blocks:
            fb = frozenset(int(x) for x in b)
            if not fb:
                raise ValueError("empty block in partition")
            if seen & fb:
                raise ValueError(
                    f"overlapping blocks: vertex {min(seen & fb)} repeated"
                )
            seen |= fb
            out.append(fb)
        self.blocks: tuple[frozenset[int], ...] = tuple(
            sorted(out, key=min)
        )

    def covered(self) -> frozenset[int]:
        out: set[int] = set()
        for b in self.blocks:
            out |= b
        return frozenset(out)

    def completed(self, universe: Iterable[int]) -> tuple[frozenset[int], ...]:
        uni = set(int(x) for x in universe)
        cov = self.covered()
        if not cov <= uni:
            raise ValueError(
                f"partition mentions vertex {min(cov - uni)} "
                "outside the vertex set"
            )
        singles = [frozenset((x,)) for x in uni - cov]
        return tuple(sorted(list(self.blocks) + singles, key=min))

    def __iter__(self) -> Iterator[frozenset[int]]:
        return iter(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __eq__(self, other) -> bool:
        return isinstance(other, VertexPartition) and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self.blocks)

    def __repr__(self) -> str:
        inner = ", ".join(
            "{" + ",".join(map(str, sorted(b))) + "}" for b in self.blocks
        )
        return f"VertexPartition({inner})"


def _as_partition(pi) -> VertexPartition:
    return pi if isinstance(pi, VertexPartition) else VertexPartition(pi)


class Trigraph:
    """Bit-packed trigraph over labels 1..n (0-based internally).

    ``adj``/``alive``/``rdeg``/``sizes`` follow the layout documented in
    ``_kernels_py``.  ``side_a``/``side_b`` are optional designated sides
    set by the bipartite generator and used by the scheduling code.
    """

    __slots__ = ("n", "W", "adj", "alive", "rdeg", "sizes", "side_a", "side_b")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"vertex count must be >= 1, got {n}")
        self.n = int(n)
        self.W = K.words_for(self.n)
        self.adj = np.zeros((self.n, self.W, 2), dtype=np.uint64)
        self.alive = np.zeros(self.W, dtype=np.uint64)
        ones = np.ones(self.n, dtype=np.uint8)
        packed = np.packbits(ones, bitorder="little")
        self.alive.view(np.uint8)[: packed.size] = packed
        self.rdeg = np.zeros(self.n, dtype=np.int64)
        self.sizes = np.ones(self.n, dtype=np.int64)
        self.side_a: Optional[frozenset[int]] = None
        self.side_b: Optional[frozenset[int]] = None

    # -- construction ---------------------------------------------------

    @classmethod
    def from_edge_list(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Trigraph":
        g = cls(n)
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (1 <= u <= n) or not (1 <= v <= n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge ({key[0]},{key[1]})")
            seen.add(key)
            g._set_black(u - 1, v - 1)
        return g

    def _set_black(self, i: int, j: int) -> None:
        self.adj[i, j >> 6, 0] |= np.uint64(1 << (j & 63))
        self.adj[j, i >> 6, 0] |= np.uint64(1 << (i & 63))

    def _set_red(self, i: int, j: int) -> None:
        self.adj[i, j >> 6, 1] |= np.uint64(1 << (j & 63))
        self.adj[j, i >> 6, 1] |= np.uint64(1 << (i & 63))
        self.rdeg[i] += 1
        self.rdeg[j] += 1

    def copy(self) -> "Trigraph":
        g = object.__new__(Trigraph)
        g.n = self.n
        g.W = self.W
        g.adj = self.adj.copy()
        g.alive = self.alive.copy()
        g.rdeg = self.rdeg.copy()
        g.sizes = self.sizes.copy()
        g.side_a = self.side_a
        g.side_b = self.side_b
        return g

    # -- bookkeeping ----------------------------------------------------

    def is_alive(self, v: int) -> bool:
        self._check_range(v)
        i = v - 1
        return bool(self.alive[i >> 6] >> np.uint64(i & 63) & np.uint64(1))

    def _check_range(self, v: int) -> None:
        if not (1 <= v <= self.n):
            raise ValueError(f"vertex {v} out of range 1..{self.n}")

    def _check_alive(self, v: int) -> int:
        self._check_range(v)
        if not self.is_alive(v):
            raise ValueError(f"vertex {v} is dead (already contracted)")
        return v - 1

    def alive_vertices(self) -> list[int]:
        bits = K.unpack_words(self.alive, self.n)
        return [int(i) + 1 for i in np.nonzero(bits)[0]]

    def alive_count(self) -> int:
        return K.popcount_words(self.alive)

    def size_of(self, v: int) -> int:
        self._check_alive(v)
        return int(self.sizes[v - 1])

    def _row(self, v: int, plane: int) -> np.ndarray:
        """Alive-masked adjacency row of an alive vertex, self bit cleared."""
        i = v - 1
        row = self.adj[i, :, plane] & self.alive
        row[i >> 6] &= ~np.uint64(1 << (i & 63))
        return row

    def neighbors(self, v: int, plane: int = 0) -> list[int]:
        self._check_alive(v)
        bits = K.unpack_words(self._row(v, plane), self.n)
        return [int(i) + 1 for i in np.nonzero(bits)[0]]

    def has_black_edge(self, u: int, v: int) -> bool:
        iu = self._check_alive(u)
        iv = self._check_alive(v)
        return bool(self.adj[iu, iv >> 6, 0] >> np.uint64(iv & 63) & np.uint64(1))

    def has_red_edge(self, u: int, v: int) -> bool:
        iu = self._check_alive(u)
        iv = self._check_alive(v)
        return bool(self.adj[iu, iv >> 6, 1] >> np.uint64(iv & 63) & np.uint64(1))

    def black_edges(self) -> list[tuple[int, int]]:
        return self._edges(0)

    def red_edges(self) -> list[tuple[int, int]]:
        return self._edges(1)

    def _edges(self, plane: int) -> list[tuple[int, int]]:
        out = []
        for u in self.alive_vertices():
            for v in self.neighbors(u, plane):
                if u < v:
                    out.append((u, v))
        return out

    def red_edge_count(self) -> int:
        alive = [v for v in self.alive_vertices()]
        return sum(int(self.rdeg[v - 1]) for v in alive) // 2

    def is_plain(self) -> bool:
        return not np.any(self.rdeg[self._alive_idx()] > 0)

    def _alive_idx(self) -> np.ndarray:
        return np.nonzero(K.unpack_words(self.alive, self.n))[0]

    # -- degrees ----------------------------------------------------------

    def red_degree(self, v: int) -> int:
        i = self._check_alive(v)
        return int(self.rdeg[i])

    def max_red_degree(self) -> int:
        return int(self.rdeg.max())  # dead entries are -1, alive >= 0

    def degree(self, v: int) -> int:
        """Black + red degree toward alive vertices."""
        self._check_alive(v)
        both = self._row(v, 0) | self._row(v, 1)
        return K.popcount_words(both)

    def contraction_red_degree(self, u: int, v: int) -> int:
        iu = self._check_alive(u)
        iv = self._check_alive(v)
        if iu == iv:
            raise ValueError(f"cannot contract vertex {u} with itself")
        return K.pair_red_degree(self.adj, self.alive, iu, iv)

    # -- contraction ------------------------------------------------------

    def contract(self, u: int, v: int) -> "Trigraph":
        """G/{u,v} as a new trigraph; the merged class keeps label min(u,v)."""
        g = self.copy()
        g.contract_in_place(u, v)
        return g

    def contract_in_place(self, u: int, v: int) -> int:
        iu = self._check_alive(u)
        iv = self._check_alive(v)
        if iu == iv:
            raise ValueError(f"cannot contract vertex {u} with itself")
        if iu > iv:
            iu, iv = iv, iu
        if self.alive_count() < 2:
            raise ValueError("nothing left to contract")
        return int(K.contract_step(self.adj, self.alive, self.rdeg,
                                   self.sizes, iu, iv))

    # -- derived graphs ---------------------------------------------------

    def complement(self) -> "Trigraph":
        if not self.is_plain():
            raise ValueError("complement is defined for red-free trigraphs only")
        g = Trigraph(self.n)
        g.alive = self.alive.copy()
        g.sizes = self.sizes.copy()
        g.side_a, g.side_b = self.side_a, self.side_b
        dead = np.nonzero(K.unpack_words(self.alive, self.n) == 0)[0]
        nb = ~self.adj[:, :, 0] & self.alive[None, :]
        for i in range(self.n):
            nb[i, i >> 6] &= ~np.uint64(1 << (i & 63))
        nb[dead, :] = 0
        g.adj[:, :, 0] = nb
        g.rdeg[dead] = -1
        g.sizes[dead] = 0
        return g

    def quotient(self, pi) -> "Trigraph":
        """Merge each partition block into its smallest label, all at once.

        The relation between two blocks is black iff every cross pair is
        a black edge, absent iff none is, red otherwise.  Computed by
        direct block aggregation, deliberately not by repeated
        contraction — the equivalence of the two is a tested property.
        """
        if not self.is_plain():
            raise ValueError("quotient is defined for red-free trigraphs only")
        blocks = _as_partition(pi).completed(self.alive_vertices())
        g = Trigraph(self.n)
        g.side_a, g.side_b = self.side_a, self.side_b
        reps = [min(b) - 1 for b in blocks]
        masks = [K.pack_index_mask([x - 1 for x in b], self.n) for b in blocks]
        col_and = []
        col_or = []
        for b in blocks:
            rows = self.adj[[x - 1 for x in b], :, 0] & self.alive[None, :]
            col_and.append(np.bitwise_and.reduce(rows, axis=0))
            col_or.append(np.bitwise_or.reduce(rows, axis=0))
        alive_bits = np.zeros(self.n, dtype=np.uint8)
        for r in reps:
            alive_bits[r] = 1
        g.alive = np.packbits(alive_bits, bitorder="little")
        g.alive = np.pad(g.alive, (0, self.W * 8 - g.alive.size)).view(np.uint64)
        g.adj[:, :, :] = 0
        g.rdeg[:] = -1
        g.sizes[:] = 0
        k = len(blocks)
        for i in range(k):
            g.rdeg[reps[i]] = 0
            g.sizes[reps[i]] = sum(self.sizes[x - 1] for x in blocks[i])
        for i in range(k):
            for j in range(i + 1, k):
                want = int(np.bitwise_count(masks[j]).sum())
                full = int(np.bitwise_count(col_and[i] & masks[j]).sum())
                some = int(np.bitwise_count(col_or[i] & masks[j]).sum())
                if full == want and some:
                    g._set_black(reps[i], reps[j])
                elif some:
                    g._set_red(reps[i], reps[j])
        return g

    def bipartite_red_degree(self, a_side, b_side, pi, block) -> int:
        """Red degree of ``block`` in the quotient of G[A,B] under ⟨Π⟩.

        Only cross edges (one endpoint per side) exist in G[A,B]; pairs
        inside a side count as non-edges.
        """
        A = frozenset(int(x) for x in a_side)
        B = frozenset(int(x) for x in b_side)
        if A & B:
            raise ValueError(f"sides overlap at vertex {min(A & B)}")
        for x in A | B:
            self._check_alive(x)
        blocks = _as_partition(pi).completed(A | B)
        S = frozenset(int(x) for x in block)
        if S not in blocks:
            raise ValueError("requested block is not a class of the partition")
        amask = K.pack_index_mask([x - 1 for x in A], self.n)
        bmask = K.pack_index_mask([x - 1 for x in B], self.n)

        def cross_row(x: int) -> np.ndarray:
            side = bmask if x in A else amask
            return self.adj[x - 1, :, 0] & side

        red = 0
        for T in blocks:
            if T == S:
                continue
            tmask = K.pack_index_mask([x - 1 for x in T], self.n)
            have = 0
            for x in sorted(S):
                have += int(np.bitwise_count(cross_row(x) & tmask).sum())
            # same-side pairs inside S×T are non-edges of G[A,B], so the
            # relation is black only when *every* pair is a cross edge
            if 0 < have < len(S) * len(T):
                red += 1
        return red

    # -- equality ---------------------------------------------------------

    def same_structure(self, other: "Trigraph") -> bool:
        """Equality over the alive part: labels, sizes, and both relations."""
        if self.n != other.n or not np.array_equal(self.alive, other.alive):
            return False
        idx = self._alive_idx()
        if not np.array_equal(self.sizes[idx], other.sizes[idx]):
            return False
        a = self.adj[idx] & self.alive[None, :, None]
        b = other.adj[idx] & other.alive[None, :, None]
        return bool(np.array_equal(a, b))

    def __eq__(self, other) -> bool:
        return isinstance(other, Trigraph) and self.same_structure(other)

    def __hash__(self):  # pragma: no cover - mutable, not hashable
        raise TypeError("Trigraph is not hashable")

    def __repr__(self) -> str:
        return (f"Trigraph(n={self.n}, alive={self.alive_count()}, "
                f"black={len(self.black_edges())}, red={len(self.red_edges())})")


# -- module-level operation aliases (the documented API) -------------------

def from_edge_list(n: int, edges: Iterable[tuple[int, int]]) -> Trigraph:
    return Trigraph.from_edge_list(n, edges)


def contract(g: Trigraph, u: int, v: int) -> Trigraph:
    return g.contract(u, v)


def contraction_red_degree(g: Trigraph, u: int, v: int) -> int:
    return g.contraction_red_degree(u, v)


def red_degree(g: Trigraph, v: int) -> int:
    return g.red_degree(v)


def max_red_degree(g: Trigraph) -> int:
    return g.max_red_degree()


def quotient(g: Trigraph, pi) -> Trigraph:
    return g.quotient(pi)


def complement(g: Trigraph) -> Trigraph:
    return g.complement()


def bipartite_red_degree(g: Trigraph, a_side, b_side, pi, block) -> int:
    return g.bipartite_red_degree(a_side, b_side, pi, block)


# -- text format ------------------------------------------------------------

def write_graph(g: Trigraph, path, debug: bool = False) -> None:
    """`n m` header then one `u v` line per black edge; with ``debug``,
    red edges follow as `r u v` lines."""
    black = g.black_edges()
    lines = [f"{g.n} {len(black)}"]
    lines += [f"{u} {v}" for u, v in black]
    if debug:
        lines += [f"r {u} {v}" for u, v in g.red_edges()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph(path) -> Trigraph:
    with open(path) as fh:
        raw = fh.readlines()
    header = None
    lineno = 0
    for lineno, line in enumerate(raw, start=1):
        if line.strip():
            header = line.split()
            break
    if header is None:
        raise ParseError(max(lineno, 1), "empty graph file")
    if len(header) != 2:
        raise ParseError(lineno, f"expected header `n m`, got {' '.join(header)!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(lineno, f"non-integer header {' '.join(header)!r}") from None
    if n < 1:
        raise ParseError(lineno, f"vertex count must be >= 1, got {n}")
    if m < 0:
        raise ParseError(lineno, f"edge count must be >= 0, got {m}")
    g = Trigraph(n)
    seen: set[tuple[int, int]] = set()
    black_read = 0
    for off, line in enumerate(raw[lineno:], start=lineno + 1):
        parts = line.split()
        if not parts:
            continue
        is_red = parts[0] == "r"
        if is_red:
            parts = parts[1:]
        if len(parts) != 2:
            raise ParseError(off, f"expected `u v`, got {line.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(off, f"non-integer vertex in {line.strip()!r}") from None
        if not (1 <= u <= n) or not (1 <= v <= n):
            raise ParseError(off, f"vertex out of range 1..{n} in ({u},{v})")
        if u == v:
            raise ParseError(off, f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(off, f"duplicate edge ({key[0]},{key[1]})")
        seen.add(key)
        if is_red:
            g._set_red(u - 1, v - 1)
        else:
            black_read += 1
            if black_read > m:
                raise ParseError(off, f"more than {m} black edges")
            g._set_black(u - 1, v - 1)
    if black_read != m:
        raise ParseError(len(raw), f"header promised {m} edges, found {black_read}")
    return g
