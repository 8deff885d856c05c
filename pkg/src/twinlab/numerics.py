"""Threshold functions, predicted widths, tail bounds, and certificates.

Scalar formulas are evaluated in double precision, with log-space
summation wherever many terms multiply.  Identities are compared at
1e-12; the lemma-style inequalities get the same 1e-12 guard because
several of them are exact equalities at their boundary cases (k=2, k=3,
p ∈ {0,1}) where float rounding can land on either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._backend import K
from .trigraph import Trigraph

_TOL = 1e-12


# -- threshold functions ----------------------------------------------------

def _check_open01(x: float, name: str) -> float:
    x = float(x)
    if not (0.0 < x < 1.0):
        raise ValueError(f"{name} must lie in (0,1), got {x}")
    return x


def _pow_gap(k: int, x: float) -> float:
    """1 - x**k - (1-x)**k without the cancellation near the endpoints.

    With s = min(x, 1-x) the dominant term (1-s)**k is rewritten through
    expm1/log1p so the result keeps full relative precision even when
    s is tiny and 1 - (1-s)**k ~ k*s.
    """
    s = min(x, 1.0 - x)
    return -math.expm1(k * math.log1p(-s)) - s**k


def alpha(x: float) -> float:
    x = _check_open01(x, "x")
    num = x * (1.0 - x)
    den = 2.0 * _pow_gap(3, x) - _pow_gap(6, x)
    return num / den


def beta(x: float) -> float:
    x = _check_open01(x, "x")
    e8 = _pow_gap(8, x)
    e12 = _pow_gap(12, x)
    return (2.0 * x * (1.0 - x) + e8 - e12) / (3.0 * e8 - 2.0 * e12)


def alpha2(z: float) -> float:
    z = _check_open01(z, "z")
    return 1.0 / (z * (9.0 - 2.0 * z))


def beta2(z: float) -> float:
    z = _check_open01(z, "z")
    num = 2.0 * z**5 - 36.0 * z**4 + 103.0 * z**3 - 96.0 * z**2 + 34.0 * z - 2.0
    den = 4.0 * z * (z**4 - 18.0 * z**3 + 51.0 * z**2 - 44.0 * z + 12.0)
    return num / den


def p_star(tol: float = 1e-12) -> float:
    """Bisection root of alpha - beta inside the proven (0.4012, 0.4013)."""
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    lo, hi = 0.4012, 0.4013
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if alpha(mid) > beta(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- predicted widths ---------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    """A formula evaluation with its provenance-free metadata.

    ``omitted_terms`` names what the asymptotic statement drops — these
    are large-n predictions, not finite-n guarantees.
    """

    value: float
    formula: str
    inputs: dict
    omitted_terms: str
    clamped: bool = False

    def __float__(self) -> float:
        return self.value


def predicted_dense_width(n: int, p: float) -> Prediction:
    p = _check_open01(p, "p")
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    q = 1.0 - p
    value = 2 * p * q * n - math.sqrt(6 * p * q * (1 - 2 * p * q) * n * math.log(n))
    return Prediction(
        value=value,
        formula="2pqn - sqrt(6pq(1-2pq) n ln n)",
        inputs={"n": n, "p": p},
        omitted_terms="o(sqrt(n ln n))",
    )


def predicted_lower_dense(n: int, p: float, g: float) -> Prediction:
    p = _check_open01(p, "p")
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    g = float(g)
    if g < 0:
        raise ValueError(f"slack g must be >= 0, got {g}")
    q = 1.0 - p
    value = (2 * p * q * (n - 2)
             - math.sqrt(6 * p * q * (1 - 2 * p * q) * (n - 2) * math.log(n))
             - g)
    return Prediction(
        value=value,
        formula="2pq(n-2) - sqrt(6pq(1-2pq)(n-2) ln n) - g",
        inputs={"n": n, "p": p, "g": g},
        omitted_terms="none (g carries the slack)",
    )


def predicted_sparse_upper(m_edges: int) -> Prediction:
    m = int(m_edges)
    if m < 2:
        raise ValueError(f"edge count must be >= 2, got {m}")
    value = (math.sqrt(3 * m)
             + m**0.25 * math.sqrt(math.log(m)) / (4 * 3**0.25)
             + 1.5 * m**0.25)
    return Prediction(
        value=value,
        formula="sqrt(3m) + m^(1/4) sqrt(ln m)/(4*3^(1/4)) + 3 m^(1/4)/2",
        inputs={"m_edges": m},
        omitted_terms="O(ln m) additive",
    )


def predicted_sparse_lower(n: int, p: float, delta: float) -> Prediction:
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    delta = float(delta)
    if not (0.0 < delta <= 4.0 / 7.0):
        raise ValueError(f"delta must lie in (0, 4/7], got {delta}")
    p = float(p)
    if not (1.0 / n <= p <= 0.5):
        raise ValueError(f"p must lie in [1/n, 1/2], got {p}")
    raw = (1 - delta) * n * p - 4 * (1 - delta) / delta
    return Prediction(
        value=max(raw, 0.0),
        formula="(1-delta) n p - 4(1-delta)/delta",
        inputs={"n": n, "p": p, "delta": delta},
        omitted_terms="none (clamped at 0 when negative)",
        clamped=raw < 0.0,
    )


# -- binomial tails ------------------------------------------------------------

def exact_binom_cdf(n: int, p: float, k: int) -> float:
    """Pr[Bin(n,p) <= k], summed in log space."""
    n, k = int(n), int(k)
    if not (0 <= k <= n):
        raise ValueError(f"k must lie in [0, n], got k={k}, n={n}")
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0,1], got {p}")
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    lp, lq = math.log(p), math.log1p(-p)
    lgn = math.lgamma(n + 1)
    terms = [
        lgn - math.lgamma(i + 1) - math.lgamma(n - i + 1) + i * lp + (n - i) * lq
        for i in range(k + 1)
    ]
    m = max(terms)
    total = m + math.log(sum(math.exp(t - m) for t in terms))
    return min(1.0, math.exp(total))


@dataclass(frozen=True)
class TailBoundQuery:
    n: int
    p: float
    eps: float


def binom_upper_bound(q: TailBoundQuery) -> float:
    """Closed-form upper bound on Pr[X <= (p - eps) n]."""
    n, p, eps = int(q.n), float(q.p), float(q.eps)
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0,1), got {p}")
    if not (0.0 < eps):
        raise ValueError(f"eps > 0 fails: eps={eps}")
    if not (eps <= 0.3 * p):
        raise ValueError(f"eps <= 3p/10 fails: eps={eps}, p={p}")
    pq = p * (1.0 - p)
    expo = -n * eps**2 / (2 * pq) + n * eps**3 / (2 * p**2 * (1 - p) ** 2)
    return math.exp(expo)


def binom_lower_bound(q: TailBoundQuery) -> float:
    """Closed-form lower bound on Pr[Bin(n,p) <= (p - eps) n]."""
    n, p, eps = int(q.n), float(q.p), float(q.eps)
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0,1), got {p}")
    if n < 4:
        raise ValueError(f"n >= 4 fails: n={n}")
    if not (eps >= 1.0 / math.sqrt(n)):
        raise ValueError(f"eps >= 1/sqrt(n) fails: eps={eps}, n={n}")
    if not (eps <= min(p / 2, 1.0 - p)):
        raise ValueError(f"eps <= min(p/2, 1-p) fails: eps={eps}, p={p}")
    pq = p * (1.0 - p)
    ne2 = n * eps**2
    expo = (-ne2 / (2 * pq)
            - 3 * math.sqrt(ne2) / (2 * pq)
            - 4 * n * eps**3 / (p**2 * (1 - p) ** 2))
    return math.exp(expo) / (2 * math.sqrt(2))


def kl_div(x: float, y: float) -> float:
    """Relative entropy D(x || y) between Bernoulli parameters, 0 ln 0 = 0."""
    x, y = float(x), float(y)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0,1], got {x}")
    if not (0.0 < y < 1.0):
        raise ValueError(f"y must lie in (0,1), got {y}")
    out = 0.0
    if x > 0.0:
        out += x * math.log(x / y)
    if x < 1.0:
        out += (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    return out


# -- inequality suites ----------------------------------------------------------

@dataclass
class LemmaReport:
    """Outcome of the pq inequality suite for one p."""

    p: float
    k_max: int
    checks: int = 0
    violations: list = field(default_factory=list)
    min_slack: float = math.inf
    max_slack: float = -math.inf

    @property
    def ok(self) -> bool:
        return not self.violations

    def _record(self, label: str, lhs: float, rhs: float, strict: bool) -> None:
        self.checks += 1
        slack = rhs - lhs
        self.min_slack = min(self.min_slack, slack)
        self.max_slack = max(self.max_slack, slack)
        bad = (slack <= 0.0) if strict else (slack < -_TOL)
        if bad:
            self.violations.append((label, lhs, rhs))


def check_pq_lemmas(p: float, k_max: int) -> LemmaReport:
    """Evaluate the power-sum inequalities over 2 <= k <= k_max.

    Covers: the ratio-form chain ((1-p^k-q^k)/k vs the k-1 term minus the
    (pq)^{k/2} correction, k >= 3), the direct bound vs kpq (k >= 2), the
    strict superadditivity of k -> 1-p^k-q^k (strict only for interior
    p), and the binomial-sum bound (en/k)^k.  The <= forms get a 1e-12
    guard: at k=2 and k=3 they are exact equalities for every p.
    """
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0,1], got {p}")
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    q = 1.0 - p
    rep = LemmaReport(p=p, k_max=k_max)
    e = lambda k: 1.0 - p**k - q**k
    pq = p * q

    for k in range(3, k_max + 1):
        corr = (2**k - 2 * k - 2) / (k * (k - 1)) * pq ** (k / 2)
        rep._record(f"ratio-chain k={k}", e(k) / k, e(k - 1) / (k - 1) - corr,
                    strict=False)
    for k in range(2, k_max + 1):
        corr = ((k - 4) * 2 ** (k - 2) + 2) * pq ** (k / 2)
        rep._record(f"kpq-bound k={k}", e(k), k * pq - corr, strict=False)
    strict = 0.0 < p < 1.0
    for m in range(2, k_max + 1):
        for k in range(2, k_max + 1):
            rep._record(f"superadditive m={m},k={k}", e(m + k), e(m) + e(k),
                        strict=strict)
    for n in range(1, k_max + 1):
        for k in range(1, n + 1):
            lhs = float(sum(math.comb(n, i) for i in range(k + 1)))
            rhs = (math.e * n / k) ** k
            rep._record(f"binom-sum n={n},k={k}", lhs, rhs * (1 + 1e-14),
                        strict=False)
    return rep


def power_sum_identity_gap(p: float) -> float:
    """|(1-p^6-q^6) - (6pq - (pq)^2 (9-2pq))| — the closed-form identity."""
    p = float(p)
    q = 1.0 - p
    pq = p * q
    return abs((1.0 - p**6 - q**6) - (6.0 * pq - pq**2 * (9.0 - 2.0 * pq)))


# -- graph-side certificates ------------------------------------------------------

def count_low_pairs(g: Trigraph, threshold: float) -> int:
    """Number of unordered alive pairs with merge red-degree strictly
    below ``threshold`` (exact, all pairs)."""
    if not g.is_plain():
        raise ValueError("count_low_pairs expects a red-free graph")
    rows = np.array(g.alive_vertices(), dtype=np.int64) - 1
    cnt, _ = K.count_pairs_below(g.adj, g.alive, rows, float(threshold))
    return int(cnt)


def min_pair_red_degree(g: Trigraph) -> int:
    """Smallest r over all alive pairs (helper for concentration probes)."""
    rows = np.array(g.alive_vertices(), dtype=np.int64) - 1
    _, mn = K.count_pairs_below(g.adj, g.alive, rows, 0.0)
    return int(mn)


@dataclass(frozen=True)
class LowerBoundCertificate:
    b: float
    d: float
    low_pair_count: int
    certified: bool
    certified_value: float


def certified_lower_bound(g: Trigraph, b: float, d: float) -> LowerBoundCertificate:
    """Sound lower-bound certificate: if fewer than b pairs have merge
    red-degree below b + d (and the graph has at least b + 2 vertices),
    then every contraction sequence is forced above width d."""
    b, d = float(b), float(d)
    if b <= 0 or d <= 0:
        raise ValueError(f"b and d must be positive, got b={b}, d={d}")
    nv = g.alive_count()
    if nv < b + 2:
        raise ValueError(f"need at least b+2 = {b + 2:g} vertices, have {nv}")
    cnt = count_low_pairs(g, b + d)
    ok = cnt < b
    return LowerBoundCertificate(
        b=b, d=d, low_pair_count=cnt, certified=ok,
        certified_value=d if ok else 0.0,
    )


def min_degree_subgraph(g: Trigraph) -> Trigraph:
    """Peel minimum-degree vertices (ties: smallest label) while one has
    degree <= |E(H)|/|V(H)| of the current graph; the survivor satisfies
    min degree > |E(G)|/|V(G)| of the input."""
    if not g.is_plain():
        raise ValueError("min_degree_subgraph expects a red-free graph")
    verts = g.alive_vertices()
    deg = {v: g.degree(v) for v in verts}
    edges = sum(deg.values()) // 2
    if edges == 0:
        raise ValueError("graph has no edges")
    nbrs = {v: set(g.neighbors(v, 0)) for v in verts}
    live = set(verts)
    while True:
        v = min(live, key=lambda x: (deg[x], x))
        if deg[v] * len(live) > edges:  # deg > |E|/|V| in exact arithmetic
            break
        live.discard(v)
        edges -= deg[v]
        for w in nbrs[v]:
            if w in live:
                deg[w] -= 1
                nbrs[w].discard(v)
        del deg[v], nbrs[v]
    keep = sorted(live)
    relabel = {v: i + 1 for i, v in enumerate(keep)}
    out_edges = [
        (relabel[u], relabel[w])
        for u in keep for w in nbrs[u] if u < w
    ]
    return Trigraph.from_edge_list(len(keep), out_edges)


def count_k2m(g: Trigraph, m_side: int, existence: bool = False):
    """Complete-bipartite (2, m) subgraph count via common neighborhoods.

    Counts (pair, m-subset of the pair's common neighborhood) choices;
    for m_side == 2 both sides of each subgraph are pairs, so the raw
    count double-covers and is halved.  ``existence=True`` short-circuits
    to a boolean.
    """
    m = int(m_side)
    if m < 2:
        raise ValueError(f"m_side must be >= 2, got {m}")
    if not g.is_plain():
        raise ValueError("count_k2m expects a red-free graph")
    verts = g.alive_vertices()
    rows = {v: g._row(v, 0) for v in verts}
    total = 0
    for i, u in enumerate(verts):
        for w in verts[i + 1:]:
            common = int(np.bitwise_count(rows[u] & rows[w]).sum())
            if common >= m:
                if existence:
                    return True
                total += math.comb(common, m)
    if existence:
        return False
    return total // 2 if m == 2 else total
