"""Contraction sequences: replay, width measurement, verification, I/O.

A sequence is an ordered list of label pairs; replaying it on a trigraph
produces a trace holding the merged class's red degree and the global
maximum red degree after every step.  Partial sequences are first-class;
a full sequence ends at a single vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from ._backend import K
from .trigraph import ParseError, Trigraph

# contiguous stretches of disjoint (2t-1, 2t) merges at least this long
# are handed to the no-scatter bulk kernel (when the graph is big enough
# for the difference to matter)
BULK_MIN_RUN = 512
BULK_MIN_N = 4096


class SequenceError(ValueError):
    """Invalid step during replay; ``step`` is the 1-based position."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


class ContractionSequence:
    """Ordered vertex pairs; each pair is stored as (min, max)."""

    __slots__ = ("steps",)

    def __init__(self, steps: Iterable[Sequence[int]] = ()):
        out = []
        for pos, pair in enumerate(steps, start=1):
            u, v = int(pair[0]), int(pair[1])
            if u == v:
                raise SequenceError(pos, f"self-pair ({u},{u})")
            if u < 1 or v < 1:
                raise SequenceError(pos, f"vertex labels must be >= 1, got ({u},{v})")
            out.append((u, v) if u < v else (v, u))
        self.steps: tuple[tuple[int, int], ...] = tuple(out)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    def __eq__(self, other) -> bool:
        if isinstance(other, ContractionSequence):
            return self.steps == other.steps
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.steps)

    def __add__(self, other: "ContractionSequence") -> "ContractionSequence":
        return ContractionSequence(self.steps + tuple(other))

    def __repr__(self) -> str:
        return f"ContractionSequence({list(self.steps)!r})"


@dataclass
class SequenceTrace:
    """Replay record: per-step merged and global red degrees.

    ``width`` covers the whole run including the starting trigraph, so a
    trace answers the d-sequence question directly.  ``initial_sizes``
    keeps the class sizes the replay started from (None = fresh graph,
    all ones), which is what the size histogram is reconstructed from.
    """

    n: int
    steps: ContractionSequence
    merged_rdeg: np.ndarray
    max_rdeg: np.ndarray
    initial_max: int
    final_alive: int
    initial_sizes: Optional[np.ndarray] = None

    @property
    def width(self) -> int:
        w = int(self.max_rdeg.max()) if len(self.max_rdeg) else 0
        return max(self.initial_max, w)

    def is_full(self) -> bool:
        return self.final_alive == 1

    def class_histogram(self, s: int) -> dict[int, int]:
        """C_{s,i}: size distribution of G_s, the state after s-1 steps."""
        t = len(self.steps)
        if not (1 <= s <= t + 1):
            raise ValueError(f"step index {s} out of range 1..{t + 1}")
        if self.initial_sizes is None:
            sizes = np.ones(self.n, dtype=np.int64)
        else:
            sizes = self.initial_sizes.astype(np.int64).copy()
        for u, v in self.steps[: s - 1]:
            sizes[u - 1] += sizes[v - 1]
            sizes[v - 1] = 0
        hist: dict[int, int] = {}
        for sz in sizes:
            if sz > 0:
                hist[int(sz)] = hist.get(int(sz), 0) + 1
        return hist

    def total_weight(self) -> int:
        if self.initial_sizes is None:
            return self.n
        return int(self.initial_sizes.sum())

    def obs22_holds(self) -> bool:
        """Σ_i i·C_{s,i} equals the vertex weight at every step.

        Single pass: each step's weight transfer is re-read from the
        array after writing, so any bookkeeping drift (self-merges,
        aliasing, stale entries) still trips the check — equivalent to
        rebuilding the histogram at every s, but linear instead of
        quadratic in the sequence length.
        """
        want = self.total_weight()
        if self.initial_sizes is None:
            sizes = [1] * self.n
        else:
            sizes = [int(x) for x in self.initial_sizes]
        if sum(sizes) != want:
            return False
        for u, v in self.steps:
            su, sv = sizes[u - 1], sizes[v - 1]
            sizes[u - 1] = su + sv
            sizes[v - 1] = 0
            if sizes[u - 1] + sizes[v - 1] != su + sv:
                return False
        return sum(sizes) == want

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("step,u,v,merged_rdeg,max_rdeg\n")
            for i, (u, v) in enumerate(self.steps):
                fh.write(f"{i + 1},{u},{v},{self.merged_rdeg[i]},{self.max_rdeg[i]}\n")


def class_histogram(trace: SequenceTrace, s: int) -> dict[int, int]:
    return trace.class_histogram(s)


def _find_bulk_run(steps, start: int, alive_bits: np.ndarray) -> int:
    """Length of the maximal kernel-eligible run beginning at ``start``.

    Eligible: consecutive steps (u, u+1) with u odd (so the 0-based pair
    is even-aligned and shares a word), pairwise disjoint, and all labels
    alive before the run.  Anything else falls back to per-step scatter,
    which also produces the precise error for invalid steps.
    """
    n = alive_bits.size
    k = 0
    used: set[int] = set()
    for idx in range(start, len(steps)):
        u, v = steps[idx]
        if v != u + 1 or u % 2 == 0 or v > n:
            break
        if u in used or not (alive_bits[u - 1] and alive_bits[v - 1]):
            break
        used.add(u)
        k += 1
    return k


def apply_sequence(g: Trigraph, seq, *, in_place: bool = False,
                   bulk_min_run: int = BULK_MIN_RUN) -> SequenceTrace:
    """Replay ``seq`` on ``g`` and record exact red degrees per step.

    The caller's graph is left untouched unless ``in_place=True`` (which
    avoids a full state copy — at n=10^5 the copy is gigabytes).
    """
    if not isinstance(seq, ContractionSequence):
        seq = ContractionSequence(seq)
    h = g if in_place else g.copy()
    t = len(seq)
    merged = np.zeros(t, dtype=np.int64)
    maxes = np.zeros(t, dtype=np.int64)
    initial_max = h.max_red_degree()
    initial_sizes = None if int(h.sizes.max(initial=1)) <= 1 else h.sizes.copy()

    use_bulk = h.n >= BULK_MIN_N
    i = 0
    while i < t:
        run = 0
        if use_bulk:
            # shape-test the current step before paying for the alive
            # unpack: almost every scatter step fails it
            u, v = seq.steps[i]
            if v == u + 1 and u % 2 == 1 and v <= h.n:
                alive_bits = K.unpack_words(h.alive, h.n)
                run = _find_bulk_run(seq.steps, i, alive_bits)
        if run >= bulk_min_run:
            pairs = np.array(
                [(u - 1, v - 1) for u, v in seq.steps[i: i + run]],
                dtype=np.int64,
            )
            m_out, x_out = K.bulk_adjacent_pairs(h.adj, h.alive, h.rdeg,
                                                 h.sizes, pairs)
            merged[i: i + run] = m_out
            maxes[i: i + run] = x_out
            i += run
            continue
        u, v = seq.steps[i]
        try:
            merged[i] = h.contract_in_place(u, v)
        except ValueError as exc:
            raise SequenceError(i + 1, str(exc)) from None
        maxes[i] = h.max_red_degree()
        i += 1

    return SequenceTrace(
        n=g.n,
        steps=seq,
        merged_rdeg=merged,
        max_rdeg=maxes,
        initial_max=initial_max,
        final_alive=h.alive_count(),
        initial_sizes=initial_sizes,
    )


def verify_width(g: Trigraph, seq, d: int, *, in_place: bool = False) -> bool:
    """True iff ``seq`` is a full contraction sequence of ``g`` with every
    intermediate trigraph (the start included) of max red degree <= d."""
    trace = apply_sequence(g, seq, in_place=in_place)
    return trace.is_full() and trace.width <= int(d)


def write_sequence(path, seq) -> None:
    if not isinstance(seq, ContractionSequence):
        seq = ContractionSequence(seq)
    with open(path, "w") as fh:
        for u, v in seq:
            fh.write(f"{u} {v}\n")


def read_sequence(path) -> ContractionSequence:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ParseError(lineno, f"expected `u v`, got {line.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(
                    lineno, f"non-integer vertex in {line.strip()!r}"
                ) from None
            if u == v:
                raise ParseError(lineno, f"self-pair ({u},{u})")
            if u < 1 or v < 1:
                raise ParseError(lineno, f"vertex labels must be >= 1, got ({u},{v})")
            pairs.append((u, v))
    return ContractionSequence(pairs)
