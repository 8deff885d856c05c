"""Seeded generators: determinism, distribution sanity, structure."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinlab.randgen import RandomGraphSpec, bipartite_gnp, gnp, random_cograph
from twinlab.solver import exact_twin_width

GOLD = 0x9E3779B97F4A7C15
MASK = (1 << 64) - 1


def sm64_ref(seed: int, rank: int) -> int:
    """Independent restatement of the pinned draw function."""
    z = (seed + (rank + 1) * GOLD) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def pair_rank(u, v, n):
    return (u - 1) * (2 * n - u) // 2 + (v - u - 1)


def test_spec_validation():
    with pytest.raises(ValueError):
        RandomGraphSpec(0, 0.5, 1)
    with pytest.raises(ValueError):
        RandomGraphSpec(5, 1.5, 1)
    with pytest.raises(ValueError):
        RandomGraphSpec(5, -0.1, 1)
    with pytest.raises(TypeError):
        gnp((5, 0.5, 1))


def test_gnp_matches_drawn_threshold_exactly():
    """Every pair's edge bit equals the pinned draw vs floor(p*2^64)."""
    n, p, seed = 23, 0.37, 991
    g = gnp(RandomGraphSpec(n, p, seed))
    thr = math.floor(p * 2**64)
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            want = sm64_ref(seed, pair_rank(u, v, n)) < thr
            assert g.has_black_edge(u, v) == want, (u, v)


def test_gnp_deterministic_and_seed_sensitive():
    a = gnp(RandomGraphSpec(40, 0.5, 7))
    b = gnp(RandomGraphSpec(40, 0.5, 7))
    c = gnp(RandomGraphSpec(40, 0.5, 8))
    assert a.same_structure(b)
    assert not a.same_structure(c)


def test_gnp_extreme_probabilities():
    n = 12
    empty = gnp(RandomGraphSpec(n, 0.0, 3))
    assert empty.black_edges() == []
    full = gnp(RandomGraphSpec(n, 1.0, 3))
    assert len(full.black_edges()) == n * (n - 1) // 2


def test_gnp_edge_count_near_expectation():
    n, p = 400, 0.3
    m = len(gnp(RandomGraphSpec(n, p, 2026)).black_edges())
    mean = p * n * (n - 1) / 2
    sd = math.sqrt(n * (n - 1) / 2 * p * (1 - p))
    assert abs(m - mean) < 6 * sd


def test_gnp_single_vertex():
    g = gnp(RandomGraphSpec(1, 0.9, 5))
    assert g.n == 1 and g.black_edges() == []


@given(st.integers(2, 40), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_gnp_is_plain_and_loopless(n, seed):
    g = gnp(RandomGraphSpec(n, 0.5, seed))
    assert g.is_plain()
    assert all(u != v for u, v in g.black_edges())


def test_bipartite_sides_and_cross_only():
    g = bipartite_gnp(5, 7, 0.6, 44)
    assert g.side_a == frozenset(range(1, 6))
    assert g.side_b == frozenset(range(6, 13))
    for u, v in g.black_edges():
        assert (u in g.side_a) != (v in g.side_a)


def test_bipartite_matches_drawn_threshold():
    a_count, b_count, p, seed = 4, 6, 0.52, 17
    g = bipartite_gnp(a_count, b_count, p, seed)
    thr = math.floor(p * 2**64)
    for i in range(a_count):
        for j in range(b_count):
            rank = i * b_count + j
            want = sm64_ref(seed, rank) < thr
            assert g.has_black_edge(i + 1, a_count + j + 1) == want


def test_bipartite_validation():
    with pytest.raises(ValueError):
        bipartite_gnp(0, 3, 0.5, 1)
    with pytest.raises(ValueError):
        bipartite_gnp(3, 3, 2.0, 1)


def test_bipartite_complete_when_p_one():
    g = bipartite_gnp(3, 4, 1.0, 9)
    assert len(g.black_edges()) == 12


def test_cograph_deterministic():
    assert random_cograph(9, 3).same_structure(random_cograph(9, 3))
    with pytest.raises(ValueError):
        random_cograph(0, 1)


@pytest.mark.parametrize("seed", range(8))
def test_cograph_has_twin_width_zero(seed):
    g = random_cograph(8, seed)
    value, _ = exact_twin_width(g)
    assert value == 0


@given(st.integers(1, 10), st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_cograph_is_p4_free(n, seed):
    """The defining property: no induced path on four vertices."""
    g = random_cograph(n, seed)
    adj = {v: set(g.neighbors(v)) for v in g.alive_vertices()}
    verts = g.alive_vertices()
    for a in verts:
        for b in adj[a]:
            for c in adj[b]:
                if c == a or c in adj[a]:
                    continue
                for d in adj[c]:
                    if d in (a, b) or d in adj[b] or d in adj[a]:
                        continue
                    raise AssertionError(f"induced P4 {a}-{b}-{c}-{d}")


def test_seed_wraps_modulo_2_64():
    a = gnp(RandomGraphSpec(20, 0.5, 5))
    b = gnp(RandomGraphSpec(20, 0.5, 5 + 2**64))
    assert a.same_structure(b)
