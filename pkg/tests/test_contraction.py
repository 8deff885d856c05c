"""Sequence replay, width verification, and the trace bookkeeping."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import twinlab.contraction as ctr
from twinlab.contraction import (ContractionSequence, SequenceError,
                                 SequenceTrace, apply_sequence, read_sequence,
                                 verify_width, write_sequence)
from twinlab.trigraph import ParseError, Trigraph

from oracles import RefTrigraph, ref_apply


def random_graph(n, seed, p=0.5):
    rng = np.random.default_rng(seed)
    edges = [(u + 1, v + 1) for u in range(n) for v in range(u + 1, n)
             if rng.random() < p]
    return Trigraph.from_edge_list(n, edges), RefTrigraph(n, edges)


def random_full_sequence(n, seed):
    rng = np.random.default_rng(seed)
    alive = list(range(1, n + 1))
    steps = []
    while len(alive) > 1:
        i, j = sorted(rng.choice(len(alive), size=2, replace=False))
        steps.append((alive[i], alive[j]))
        del alive[j]
    return ContractionSequence(steps)


# -- the sequence container -------------------------------------------------

def test_sequence_normalizes_to_min_max():
    s = ContractionSequence([(5, 2), (1, 3)])
    assert s.steps == ((2, 5), (1, 3))
    assert list(s) == [(2, 5), (1, 3)]
    assert s[1] == (1, 3)
    assert len(s) == 2


def test_sequence_rejects_self_pair_with_position():
    with pytest.raises(SequenceError) as exc:
        ContractionSequence([(1, 2), (3, 3)])
    assert exc.value.step == 2


def test_sequence_rejects_nonpositive_labels():
    with pytest.raises(SequenceError):
        ContractionSequence([(0, 1)])
    with pytest.raises(SequenceError):
        ContractionSequence([(-2, 4)])


def test_sequence_concat_and_equality():
    a = ContractionSequence([(1, 2)])
    b = ContractionSequence([(3, 4)])
    assert (a + b).steps == ((1, 2), (3, 4))
    assert a + b == ContractionSequence([(1, 2), (3, 4)])
    assert hash(a) == hash(ContractionSequence([(2, 1)]))


# -- replay vs oracle -------------------------------------------------------

@given(st.integers(2, 8), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_apply_sequence_matches_oracle(n, seed):
    g, r = random_graph(n, seed)
    seq = random_full_sequence(n, seed + 1)
    trace = apply_sequence(g, seq)
    merged, maxes, width = ref_apply(r, seq.steps)
    assert trace.merged_rdeg.tolist() == merged
    assert trace.max_rdeg.tolist() == maxes
    assert trace.width == width
    assert trace.is_full()
    assert trace.final_alive == 1
    assert g.alive_count() == n   # caller's graph untouched


def test_apply_sequence_in_place_mutates():
    g, _ = random_graph(6, 0)
    apply_sequence(g, [(1, 2)], in_place=True)
    assert g.alive_count() == 5


def test_apply_sequence_accepts_raw_pairs():
    g, _ = random_graph(4, 1)
    trace = apply_sequence(g, [(1, 2), (3, 4)])
    assert isinstance(trace.steps, ContractionSequence)
    assert trace.final_alive == 2
    assert not trace.is_full()


def test_apply_sequence_reports_dead_vertex_step():
    g, _ = random_graph(5, 2)
    with pytest.raises(SequenceError) as exc:
        apply_sequence(g, [(1, 2), (2, 3)])   # 2 died in step 1
    assert exc.value.step == 2


def test_apply_sequence_reports_out_of_range():
    g, _ = random_graph(4, 3)
    with pytest.raises(SequenceError) as exc:
        apply_sequence(g, [(1, 9)])
    assert exc.value.step == 1


def test_width_includes_starting_state():
    g, _ = random_graph(6, 4)
    g.contract_in_place(1, 2)
    start = g.max_red_degree()
    assert start > 0
    trace = apply_sequence(g, [])
    assert trace.width == start
    assert trace.initial_max == start
    assert not trace.is_full()


def test_empty_sequence_on_fresh_graph():
    g = Trigraph.from_edge_list(3, [(1, 2)])
    trace = apply_sequence(g, [])
    assert trace.width == 0
    assert trace.final_alive == 3


# -- verify_width -----------------------------------------------------------

def test_verify_width_tight_and_partial():
    g, r = random_graph(7, 5)
    seq = random_full_sequence(7, 6)
    _, _, width = ref_apply(r, seq.steps)
    assert verify_width(g, seq, width)
    assert not verify_width(g, seq, width - 1)
    assert not verify_width(g, ContractionSequence(seq.steps[:-1]), width)
    assert verify_width(g, seq, width + 10)


# -- bulk path == scatter path ----------------------------------------------

def test_bulk_run_detection_stops_at_ineligible():
    alive = np.ones(10, dtype=np.uint8)
    steps = ((1, 2), (3, 4), (5, 6), (6, 7))
    assert ctr._find_bulk_run(steps, 0, alive) == 3
    # even u: word-misaligned
    assert ctr._find_bulk_run(((2, 3),), 0, alive) == 0
    # repeated head vertex
    assert ctr._find_bulk_run(((1, 2), (1, 2)), 0, alive) == 1
    # dead label
    alive[2] = 0
    assert ctr._find_bulk_run(((3, 4),), 0, alive) == 0


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_bulk_trace_equals_scatter(monkeypatch, seed):
    n = 160
    g, _ = random_graph(n, seed, p=0.3)
    head = [(2 * k + 1, 2 * k + 2) for k in range(n // 2)]
    tail = [(4 * k + 1, 4 * k + 3) for k in range(n // 4)]
    rng = np.random.default_rng(seed)
    rng.shuffle(tail)
    seq = ContractionSequence(head + tail + [(1, 4 * k + 1) for k in range(1, n // 4)])

    scat = apply_sequence(g.copy(), seq, in_place=True, bulk_min_run=10**9)
    monkeypatch.setattr(ctr, "BULK_MIN_N", 1)
    g2 = g.copy()
    bulk = apply_sequence(g2, seq, in_place=True, bulk_min_run=4)

    assert bulk.merged_rdeg.tolist() == scat.merged_rdeg.tolist()
    assert bulk.max_rdeg.tolist() == scat.max_rdeg.tolist()
    assert bulk.width == scat.width
    assert bulk.is_full() and scat.is_full()


def test_bulk_threshold_respected(monkeypatch):
    """Short eligible runs must fall back to scatter (same results either way,
    but the run finder is only consulted when the head step shape-matches)."""
    g, _ = random_graph(20, 14, p=0.4)
    monkeypatch.setattr(ctr, "BULK_MIN_N", 1)
    seq = [(1, 2), (3, 4), (1, 5)]   # run of 2 < bulk_min_run
    trace = apply_sequence(g, seq, bulk_min_run=3)
    ref = apply_sequence(g, seq, bulk_min_run=10**9)
    assert trace.merged_rdeg.tolist() == ref.merged_rdeg.tolist()
    assert trace.max_rdeg.tolist() == ref.max_rdeg.tolist()


# -- trace bookkeeping ------------------------------------------------------

def test_class_histogram_tracks_merges():
    g = Trigraph.from_edge_list(5, [])
    trace = apply_sequence(g, [(1, 2), (1, 3), (4, 5)])
    assert trace.class_histogram(1) == {1: 5}
    assert trace.class_histogram(2) == {1: 3, 2: 1}
    assert trace.class_histogram(3) == {1: 2, 3: 1}
    assert trace.class_histogram(4) == {2: 1, 3: 1}
    with pytest.raises(ValueError):
        trace.class_histogram(0)
    with pytest.raises(ValueError):
        trace.class_histogram(5)


def test_class_histogram_respects_initial_sizes():
    g = Trigraph.from_edge_list(4, [])
    g.contract_in_place(1, 2)
    trace = apply_sequence(g, [(1, 3)])
    assert trace.initial_sizes is not None
    assert trace.class_histogram(1) == {1: 2, 2: 1}
    assert trace.class_histogram(2) == {1: 1, 3: 1}
    assert trace.total_weight() == 4


@given(st.integers(2, 9), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_obs22_single_pass_equals_rebuild(n, seed):
    g, _ = random_graph(n, seed)
    seq = random_full_sequence(n, seed + 7)
    trace = apply_sequence(g, seq)
    rebuilt = all(
        sum(i * c for i, c in trace.class_histogram(s).items())
        == trace.total_weight()
        for s in range(1, len(seq) + 2)
    )
    assert trace.obs22_holds() == rebuilt is True


def test_obs22_catches_self_merge_alias():
    # a hand-rolled trace whose steps bypass sequence validation
    trace = SequenceTrace(
        n=3, steps=[(1, 1)],
        merged_rdeg=np.zeros(1, dtype=np.int64),
        max_rdeg=np.zeros(1, dtype=np.int64),
        initial_max=0, final_alive=2,
    )
    assert not trace.obs22_holds()


def test_trace_to_csv(tmp_path):
    g, _ = random_graph(5, 8)
    trace = apply_sequence(g, [(1, 2), (3, 4)])
    p = tmp_path / "trace.csv"
    trace.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "step,u,v,merged_rdeg,max_rdeg"
    assert len(lines) == 3
    assert lines[1].startswith("1,1,2,")
    row = lines[2].split(",")
    assert row[:3] == ["2", "3", "4"]
    assert int(row[3]) == trace.merged_rdeg[1]
    assert int(row[4]) == trace.max_rdeg[1]


# -- sequence files ----------------------------------------------------------

def test_sequence_file_roundtrip(tmp_path):
    seq = random_full_sequence(9, 21)
    p = tmp_path / "steps.seq"
    write_sequence(p, seq)
    assert read_sequence(p) == seq


def test_read_sequence_parse_errors(tmp_path):
    p = tmp_path / "bad.seq"
    for text, frag in [("1 2 3\n", "expected"),
                       ("a b\n", "non-integer"),
                       ("4 4\n", "self-pair"),
                       ("0 3\n", ">= 1")]:
        p.write_text(text)
        with pytest.raises(ParseError, match=frag):
            read_sequence(p)


def test_read_sequence_skips_blank_lines(tmp_path):
    p = tmp_path / "gap.seq"
    p.write_text("1 2\n\n3 4\n")
    assert read_sequence(p) == ContractionSequence([(1, 2), (3, 4)])
