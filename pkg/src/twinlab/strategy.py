"""Constructive contraction schedule for dense random graphs.

The driver works on vertex labels [n], split into a front block B = [m]
and a tail block A = [n] \\ [m], and runs three phases:

  phase 1   select s disjoint pairs inside A whose prospective merge
            red degree, measured against the B side only, stays under a
            threshold; contract each selected pair;
  phase 2   grow B-side classes through a fixed recursive layout — a
            base pairs, triples extending the first m-2a of them, then
            quadruple unions of the remaining base pairs — skipping any
            step whose ingredient class has gone bad (red degree toward
            the A side past its budget);
  phase 3   contract whatever classes remain with a greedy finisher.

Widths are measured, never assumed: the caller gets the full
contraction sequence (replayable through the ordinary engine) plus a
trace with per-step maxima, the frozen-class ledger, and every skipped
merge with the class responsible for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np

from ._backend import K
from .contraction import ContractionSequence
from .numerics import alpha, _pow_gap
from .trigraph import Trigraph

_PHASE3_SEED = 0x7A1C0DE5EED  # drawn once, fixed forever
_GREEDY_CAP = 256
_SAMPLE_SIZE = 128


def _floor_pow(n: int, x: Decimal) -> int:
    """floor(n**x) computed in high-precision decimal.

    Double-precision n**x lands on the wrong side of exact integers
    (100000**0.6 evaluates just below 1000), so the exponent arithmetic
    is done on the exact binary values of the float inputs instead.
    """
    with localcontext() as ctx:
        ctx.prec = 50
        return int(Decimal(n) ** x)


# -- parameter derivation -----------------------------------------------------

@dataclass(frozen=True)
class StrategyParams:
    """Every derived constant the schedule needs, fixed at construction.

    ``m``/``a``/``s``/``r`` shape the phases; ``c`` and ``ell`` scale the
    concentration slack; the lambda/mu/rho/nu values are the per-moment
    red-degree budgets that feed both the freezing logic and the eight
    summary numbers of :meth:`eight_numbers`.
    """

    n: int
    p: float
    eps: float
    delta: float
    m: int
    a: int
    s: int
    r: int
    c: float
    ell: float
    lambda1: float
    lambda2: float
    lambda2_prime: float
    lambda3: float
    mu1: float
    mu2: float
    rho2: float
    rho3: float
    nu2: float
    nu3: float
    nu4: float

    def eight_numbers(self) -> tuple[float, ...]:
        """The eight width budgets, in order:

        finisher classes, pair-over-B, pair-over-A, late-pair-over-A,
        B-singleton, B-pair, B-triple, B-quadruple.  The schedule's
        width is expected (not guaranteed) to stay under their maximum.
        """
        n, s, r, m = self.n, self.s, self.r, self.m
        slack3 = 3 * self.ell
        return (
            n - s - r + slack3,
            s + self.mu1,
            self.lambda1 + self.lambda2,
            self.lambda2_prime + self.mu2 + slack3,
            s + self.lambda3,
            self.rho2 + self.nu2 + slack3,
            self.rho3 + self.nu3 + slack3,
            n - m - s + self.nu4 + slack3,
        )

    def width_bound(self) -> float:
        return max(self.eight_numbers())


def schedule_params(n: int, p: float, eps: float, delta: float) -> StrategyParams:
    """Derive all schedule constants for a graph on [n], failing loudly
    (with the violated inequality named) when the block sizes cannot
    satisfy the layout preconditions at this n."""
    n = int(n)
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0,1), got {p}")
    eps = float(eps)
    if not (0.0 < eps < 0.5):
        raise ValueError(f"invalid eps: must lie in (0, 1/2), got {eps}")
    delta = float(delta)
    if not (0.0 < delta < 1.0):
        raise ValueError(f"invalid delta: must lie in (0, 1), got {delta}")
    guard = 3.0 - 6.0 * eps - 4.0 * delta
    if guard <= 0.0:
        raise ValueError(f"6*eps + 4*delta < 3 fails: eps={eps}, delta={delta}")

    al = alpha(p)
    m = n - _floor_pow(n, Decimal(1) - Decimal(delta))
    a = math.floor(al * n)
    s = _floor_pow(n, Decimal(0.5) + Decimal(eps))
    if a < 1:
        raise ValueError(f"alpha(p)*n >= 1 fails: alpha={al:.4f}, n={n}")
    if 2 * a > m:
        raise ValueError(f"2a <= m fails: a={a}, m={m}")
    if m > 3 * a:
        raise ValueError(f"m <= 3a fails: a={a}, m={m}")
    if 2.0 * al * n > m:
        raise ValueError(f"2*alpha(p)*n <= m fails: alpha*n={al * n:.2f}, m={m}")
    if m > n - 2 * s:
        raise ValueError(f"m <= n - 2s fails: m={m}, n={n}, s={s}")

    q = 1.0 - p
    pq = p * q
    n1d = n ** (1.0 - delta)
    rootn = math.sqrt(n)
    nhe = n ** (0.5 + eps)
    nhe2 = n ** (0.5 + eps / 2.0)
    e4, e6 = _pow_gap(4, p), _pow_gap(6, p)
    e8, e12 = _pow_gap(8, p), _pow_gap(12, p)
    c = math.sqrt(2.0 * pq * (1.0 - 2.0 * pq) * guard)

    return StrategyParams(
        n=n, p=p, eps=eps, delta=delta,
        m=m, a=a, s=s, r=(m + a) // 2,
        c=c, ell=2.0 * rootn,
        lambda1=2 * pq * m - c * math.sqrt(m * math.log(m)),
        lambda2=2 * pq * n1d + rootn,
        lambda2_prime=2 * pq * n1d - 2 * pq * pq * s + rootn,
        lambda3=pq * n + nhe,
        mu1=pq * m + nhe2,
        mu2=2 * pq * m + nhe2,
        rho2=2 * pq * (n1d - 2 * s) + e4 * s + nhe2,
        rho3=3 * pq * (n1d - 2 * s) + e6 * s + nhe2,
        nu2=2 * pq * m + nhe2,
        nu3=2 * pq * n - 3 * pq * n1d + nhe2,
        nu4=(e8 * (3 * al - 1) + e12 * (1 - 2 * al)) * n + nhe2,
    )


# -- the recursive B-side layout -----------------------------------------------

def _check_ba(m: int, a: int) -> None:
    if not (2 * a <= m <= 3 * a) or a < 1:
        raise ValueError(f"layout requires 2a <= m <= 3a with a >= 1, got m={m}, a={a}")


def b_set(m: int, a: int, i: int) -> frozenset[int]:
    """The i-th class of the recursive layout on [m]: a pair for
    i <= a, a pair plus one extra vertex for a < i <= m-a, and the union
    of two earlier pairs above that."""
    _check_ba(m, a)
    if not (1 <= i <= (m + a) // 2):
        raise ValueError(f"i out of range: need 1 <= i <= (m+a)/2, got i={i}")
    if i <= a:
        return frozenset((2 * i - 1, 2 * i))
    if i <= m - a:
        j = i - a
        return frozenset((2 * j - 1, 2 * j, 2 * a + j))
    t = i - (m - a)
    j1 = (m - 2 * a) + 2 * t - 1
    return b_set(m, a, j1) | b_set(m, a, j1 + 1)


def _consumed_by(m: int, a: int, i: int) -> set[int]:
    """Base-pair indices absorbed into a larger class by step i."""
    gone: set[int] = set()
    for k in range(a + 1, min(i, m - a) + 1):
        gone.add(k - a)
    for k in range(m - a + 1, i + 1):
        j1 = (m - 2 * a) + 2 * (k - (m - a)) - 1
        gone.update((j1, j1 + 1))
    return gone


def b_family(m: int, a: int, i: int) -> set[frozenset[int]]:
    """All maximal classes among the first i of the layout.

    A class stops being maximal exactly when a later step extends or
    unions it, so the family is the classes of [1, i] minus the
    base pairs consumed so far.
    """
    _check_ba(m, a)
    if not (1 <= i <= (m + a) // 2):
        raise ValueError(f"i out of range: need 1 <= i <= (m+a)/2, got i={i}")
    gone = _consumed_by(m, a, i)
    return {b_set(m, a, j) for j in range(1, i + 1) if j not in gone}


# -- phase 1: pair selection ----------------------------------------------------

def _scan_and_extract(g: Trigraph, a_labels: list[int], colmask: np.ndarray,
                      target: int, threshold: float):
    """Greedy pair extraction over the A rows.

    Walks every below-threshold pair in (u, v) label order; taking a
    pair removes both endpoints plus every w that was below threshold
    with *both* of them.  Returns the selected pairs, the leftover
    below-threshold pairs whose endpoints stayed out of selected pairs,
    and the per-row runner-ups — both pools let the caller top up a
    shortfall with the best pairs still available.
    """
    rows = np.asarray(a_labels, dtype=np.int64) - 1
    hu, hv, hr, best_r, best_v = K.scan_low_pairs(
        g.adj, g.alive, rows, colmask, threshold)
    partners: dict[int, set[int]] = {}
    for u0, v0 in zip(hu, hv):
        u, v = int(u0) + 1, int(v0) + 1
        partners.setdefault(u, set()).add(v)
        partners.setdefault(v, set()).add(u)

    pairs: list[tuple[int, int]] = []
    removed: set[int] = set()
    for u0, v0 in zip(hu, hv):
        if len(pairs) >= target:
            break
        u, v = int(u0) + 1, int(v0) + 1
        if u in removed or v in removed:
            continue
        pairs.append((u, v))
        removed.add(u)
        removed.add(v)
        removed |= partners[u] & partners[v]

    used = {x for pr in pairs for x in pr}
    leftovers = [(int(r), int(u0) + 1, int(v0) + 1)
                 for u0, v0, r in zip(hu, hv, hr)
                 if int(u0) + 1 not in used and int(v0) + 1 not in used]
    runnerups = [(int(best_r[i]), int(rows[i]) + 1, int(best_v[i]) + 1)
                 for i in range(rows.size) if best_r[i] >= 0]
    return pairs, leftovers, runnerups


def _fill_disjoint(pairs: list[tuple[int, int]], pool, target: int) -> int:
    """Top a selection up to ``target`` from a (r, u, v) candidate pool,
    best red degree first, keeping the pairs disjoint.  Mutates and
    returns the number of pairs added."""
    used = {x for pr in pairs for x in pr}
    added = 0
    for _, u, v in sorted(pool):
        if len(pairs) >= target:
            break
        if u in used or v in used:
            continue
        pairs.append((u, v) if u < v else (v, u))
        used.update((u, v))
        added += 1
    return added


def select_a_pairs(g: Trigraph, target: int, threshold: float, *,
                   side_a=None, side_b=None) -> tuple[list[tuple[int, int]], bool]:
    """Disjoint low-interference pairs inside side A.

    The merge red degree of each candidate pair is measured against the
    B side only.  The primary pass is the extraction rule (taking a pair
    discards the collateral vertices below threshold with both of its
    endpoints); that discard is a worst-case counting device, so a
    second pass recycles leftover qualifying pairs among untouched
    vertices before giving up.  Every returned pair is below threshold.
    Returns (pairs, shortfall_flag); a shortfall is not an error — the
    supply of qualifying pairs simply ran out.
    """
    sa = side_a if side_a is not None else g.side_a
    sb = side_b if side_b is not None else g.side_b
    if sa is None or sb is None:
        raise ValueError("select_a_pairs needs bipartite sides (side_a/side_b)")
    target = int(target)
    if target < 0:
        raise ValueError(f"target must be >= 0, got {target}")
    a_labels = sorted(v for v in sa if g.is_alive(v))
    colmask = K.pack_index_mask([v - 1 for v in sb], g.n)
    pairs, leftovers, _ = _scan_and_extract(g, a_labels, colmask, target,
                                            float(threshold))
    if len(pairs) < target:
        _fill_disjoint(pairs, leftovers, target)
    return pairs, len(pairs) < target


# -- freezing -------------------------------------------------------------------

def detect_frozen(g: Trigraph, classes, side_a, rho2: float, rho3: float, *,
                  slack: float = 1.1) -> frozenset[int]:
    """Representatives of size-2/3 classes whose red degree toward the
    A side exceeds slack * rho_size.  ``classes`` is an iterable of
    (representative label, class size); other sizes pass through
    unfrozen."""
    mask_a = K.pack_index_mask([v - 1 for v in side_a if g.is_alive(v)], g.n)
    bad = []
    for rep, size in classes:
        if size not in (2, 3):
            continue
        budget = (rho2 if size == 2 else rho3) * slack
        red_a = K.popcount_words(g.adj[rep - 1, :, 1] & mask_a & g.alive)
        if red_a > budget:
            bad.append(rep)
    return frozenset(bad)


# -- the full schedule ------------------------------------------------------------

@dataclass
class ScheduleTrace:
    """Everything measurable about one schedule run.

    ``frozen`` maps a class representative to (class size, executed-step
    index at discovery); ``skipped`` lists (layout index i, responsible
    representatives).  Executed steps are 1-based across all phases;
    ``phase_ends`` gives the last executed step of each phase.
    """

    n: int
    selected_pairs: list
    shortfall: int
    topped_up: int
    frozen: dict
    skipped: list
    retried_ok: int
    phase_of_step: np.ndarray
    merged_rdeg: np.ndarray
    max_rdeg: np.ndarray
    initial_max: int
    phase_ends: tuple

    @property
    def width(self) -> int:
        peak = int(self.max_rdeg.max()) if self.max_rdeg.size else 0
        return max(self.initial_max, peak)

    @property
    def frozen_count(self) -> int:
        return len(self.frozen)

    def frozen_count_per_step(self) -> np.ndarray:
        """Cumulative number of frozen classes known at each executed step."""
        out = np.zeros(self.merged_rdeg.size, dtype=np.int64)
        for _, (_, step) in self.frozen.items():
            if step <= out.size:
                out[step - 1:] += 1
        return out

    def to_csv(self, path) -> None:
        frozen_at = self.frozen_count_per_step()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("phase,step,max_rdeg,frozen_count\n")
            for i in range(self.merged_rdeg.size):
                fh.write(f"{int(self.phase_of_step[i])},{i + 1},"
                         f"{int(self.max_rdeg[i])},{int(frozen_at[i])}\n")


def run_paper_schedule(g: Trigraph, params: StrategyParams, *,
                       slack: float = 1.1, in_place: bool = False,
                       greedy_cap: int = _GREEDY_CAP,
                       sample_size: int = _SAMPLE_SIZE,
                       ) -> tuple[ContractionSequence, ScheduleTrace]:
    """Run the three-phase schedule end to end and measure it.

    The input graph must be red-free with every label in [params.n]
    alive.  Phase 1 tops up a selection shortfall with the best pairs
    still available (recorded in the trace).  Phase 2 freezes a class
    when its red degree toward A exceeds ``slack`` times its budget and
    skips merges into frozen classes; skipped merges are retried once
    after the sweep, then left to phase 3.  The finisher contracts the
    survivors greedily — exhaustively below ``greedy_cap`` alive
    classes, by deterministic candidate sampling above it.
    """
    n, m, a, s, r = params.n, params.m, params.a, params.s, params.r
    if g.n != n or g.alive_count() != n:
        raise ValueError(
            f"parameter/graph mismatch: params.n={n}, graph has "
            f"{g.alive_count()} alive of {g.n}")
    if not g.is_plain():
        raise ValueError("schedule expects a red-free input graph")

    work = g if in_place else g.copy()
    initial_max = work.max_red_degree()
    steps: list[tuple[int, int]] = []
    phases: list[int] = []
    merged_log: list[int] = []
    max_log: list[int] = []
    running = initial_max

    def do_step(u: int, v: int, phase: int) -> int:
        nonlocal running
        merged = work.contract_in_place(u, v)
        cur = int(work.rdeg.max())
        running = max(running, cur)
        steps.append((u, v) if u < v else (v, u))
        phases.append(phase)
        merged_log.append(merged)
        max_log.append(cur)
        return merged

    # ---- phase 1: A-side pairs --------------------------------------
    a_labels = list(range(m + 1, n + 1))
    colmask_b = K.pack_index_mask(range(m), n)
    pairs, leftovers, runnerups = _scan_and_extract(
        work, a_labels, colmask_b, s, params.lambda1)
    shortfall = s - len(pairs)
    topped = 0
    if shortfall > 0:
        topped = _fill_disjoint(pairs, leftovers + runnerups, s)
    for u, v in pairs:
        do_step(u, v, 1)
    p1_end = len(steps)

    # ---- phase 2: the B-side layout ----------------------------------
    mask_a = work.alive & ~colmask_b  # alive A columns, fixed for phase 2
    frozen: dict[int, tuple[int, int]] = {}
    frozen_pairs: set[int] = set()
    skipped: list[tuple[int, tuple[int, ...]]] = []

    def red_toward_a(rep: int) -> int:
        return int(K.popcount_words(work.adj[rep - 1, :, 1] & mask_a))

    # base pairs (2i-1, 2i) are disjoint and adjacent-labelled: one bulk run
    base = np.arange(a, dtype=np.int64)
    bulk_pairs = np.stack([2 * base, 2 * base + 1], axis=1)
    merged_out, max_out = K.bulk_adjacent_pairs(
        work.adj, work.alive, work.rdeg, work.sizes, bulk_pairs)
    for i in range(a):
        steps.append((2 * i + 1, 2 * i + 2))
        phases.append(2)
        merged_log.append(int(merged_out[i]))
        max_log.append(int(max_out[i]))
    if a:
        running = max(running, int(max_out.max()))

    # a pair's red degree toward A is fixed once it forms (later B-side
    # merges touch only B columns), so one vectorized pass after the
    # bulk run reproduces the at-merge-time check exactly
    reps0 = 2 * base
    red_a_rows = work.adj[reps0, :, 1] & mask_a[None, :]
    red_a = np.bitwise_count(red_a_rows).sum(axis=1, dtype=np.int64)
    budget2 = slack * params.rho2
    for j in np.flatnonzero(red_a > budget2):
        rep = int(2 * j + 1)
        frozen[rep] = (2, p1_end + int(j) + 1)
        frozen_pairs.add(int(j) + 1)

    budget3 = slack * params.rho3
    for i in range(a + 1, r + 1):
        if i <= m - a:
            j = i - a
            rep = 2 * j - 1
            if j in frozen_pairs:
                skipped.append((i, (rep,)))
                continue
            do_step(rep, 2 * a + j, 2)
            if red_toward_a(rep) > budget3:
                frozen[rep] = (3, len(steps))
        else:
            t = i - (m - a)
            j1 = (m - 2 * a) + 2 * t - 1
            guilty = tuple(2 * j - 1 for j in (j1, j1 + 1) if j in frozen_pairs)
            if guilty:
                skipped.append((i, guilty))
                continue
            do_step(2 * j1 - 1, 2 * j1 + 1, 2)

    retried_ok = 0
    still_skipped: list[tuple[int, tuple[int, ...]]] = []
    for i, reps in skipped:
        if any(red_toward_a(rep) > budget2 for rep in reps):
            still_skipped.append((i, reps))
            continue
        for rep in reps:
            frozen_pairs.discard((rep + 1) // 2)
        if i <= m - a:
            j = i - a
            do_step(2 * j - 1, 2 * a + j, 2)
        else:
            j1 = (m - 2 * a) + 2 * (i - (m - a)) - 1
            do_step(2 * j1 - 1, 2 * j1 + 1, 2)
        retried_ok += 1
    skipped = still_skipped
    p2_end = len(steps)

    # ---- phase 3: greedy finisher -------------------------------------
    alive_labels = work.alive_vertices()
    ctr = 0
    while len(alive_labels) > 1:
        labs = np.asarray(alive_labels, dtype=np.int64) - 1
        k = labs.size
        if k <= greedy_cap:
            iu, iv = np.triu_indices(k, 1)
            us0, vs0 = labs[iu], labs[iv]
        else:
            draws = K.splitmix64(_PHASE3_SEED, np.arange(ctr, ctr + 2 * sample_size,
                                                         dtype=np.uint64))
            ctr += 2 * sample_size
            ii = (draws[0::2] % np.uint64(k)).astype(np.int64)
            jj = (draws[1::2] % np.uint64(k - 1)).astype(np.int64)
            jj = (ii + 1 + jj) % k
            us0 = labs[np.minimum(ii, jj)]
            vs0 = labs[np.maximum(ii, jj)]
        rs = K.eval_pairs(work.adj, work.alive, us0, vs0)
        best = int(np.lexsort((vs0, us0, rs))[0])
        u, v = int(us0[best]) + 1, int(vs0[best]) + 1
        do_step(u, v, 3)
        alive_labels.remove(v)

    trace = ScheduleTrace(
        n=n,
        selected_pairs=pairs,
        shortfall=max(shortfall, 0),
        topped_up=topped,
        frozen=frozen,
        skipped=skipped,
        retried_ok=retried_ok,
        phase_of_step=np.asarray(phases, dtype=np.int8),
        merged_rdeg=np.asarray(merged_log, dtype=np.int64),
        max_rdeg=np.asarray(max_log, dtype=np.int64),
        initial_max=initial_max,
        phase_ends=(p1_end, p2_end, len(steps)),
    )
    return ContractionSequence(steps), trace
