"""Command-line front end: graph generation, sequence replay and
verification, the solvers, the three-phase schedule, width predictions,
tail bounds, and the experiment harness.

Every subcommand prints a single JSON document on stdout.  Exit codes:
0 success, 1 domain error (bad arguments, malformed files, violated
preconditions), 2 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from .contraction import (apply_sequence, read_sequence, verify_width,
                          write_sequence)
from .experiment import ExperimentConfig, run_experiment
from .numerics import (TailBoundQuery, binom_lower_bound, binom_upper_bound,
                       predicted_dense_width, predicted_lower_dense,
                       predicted_sparse_lower, predicted_sparse_upper)
from .randgen import RandomGraphSpec, bipartite_gnp, gnp, random_cograph
from .solver import exact_twin_width, greedy_sequence
from .strategy import run_paper_schedule, schedule_params
from .trigraph import read_graph, write_graph


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _input_graph(args):
    """Graph from a positional path, or generated from --n/--p/--seed."""
    if getattr(args, "graph", None) is not None:
        return read_graph(args.graph)
    if args.n is None or args.p is None or args.seed is None:
        raise ValueError("give a graph file, or all of --n, --p, --seed")
    return gnp(RandomGraphSpec(args.n, args.p, args.seed))


def _black_edge_count(g) -> int:
    return int(np.bitwise_count(g.adj[:, :, 0]).sum()) // 2


def _cmd_gen(args) -> int:
    if args.model == "gnp":
        if args.p is None:
            raise ValueError("gnp needs --p")
        g = gnp(RandomGraphSpec(args.n, args.p, args.seed))
    elif args.model == "cograph":
        g = random_cograph(args.n, args.seed)
    else:
        if args.p is None or args.a_count is None or args.b_count is None:
            raise ValueError("bipartite needs --p, --a-count, --b-count")
        if args.a_count + args.b_count != args.n:
            raise ValueError("--a-count + --b-count must equal --n")
        g = bipartite_gnp(args.a_count, args.b_count, args.p, args.seed)
    write_graph(g, args.out)
    _emit({"model": args.model, "n": g.n, "p": args.p, "seed": args.seed,
           "black_edges": _black_edge_count(g), "path": args.out})
    return 0


def _cmd_contract(args) -> int:
    g = read_graph(args.graph)
    seq = read_sequence(args.seq)
    trace = apply_sequence(g, seq)
    if args.out_trace:
        trace.to_csv(args.out_trace)
    _emit({"steps": len(seq), "width": trace.width,
           "obs22": trace.obs22_holds()})
    return 0


def _cmd_verify(args) -> int:
    g = read_graph(args.graph)
    seq = read_sequence(args.seq)
    ok = verify_width(g, seq, args.d)
    _emit({"verified": ok, "d": args.d, "steps": len(seq)})
    return 0 if ok else 2


def _cmd_exact(args) -> int:
    g = _input_graph(args)
    res = exact_twin_width(g, node_budget=args.node_budget)
    if args.out_seq:
        write_sequence(args.out_seq, res.witness)
    _emit({"width": res.value, "exact": res.exact, "lower": res.lower,
           "upper": res.upper, "nodes": res.nodes})
    return 0


def _cmd_greedy(args) -> int:
    g = _input_graph(args)
    seq, width = greedy_sequence(g)
    if args.out_seq:
        write_sequence(args.out_seq, seq)
    _emit({"width": width, "steps": len(seq)})
    return 0


def _cmd_paper_schedule(args) -> int:
    params = schedule_params(args.n, args.p, args.eps, args.delta)
    g = gnp(RandomGraphSpec(args.n, args.p, args.seed))
    t0 = time.perf_counter()
    seq, trace = run_paper_schedule(g, params, slack=args.slack, in_place=True)
    ms = round((time.perf_counter() - t0) * 1000)
    if args.out_seq:
        write_sequence(args.out_seq, seq)
    if args.out_trace:
        trace.to_csv(args.out_trace)
    _emit({"n": args.n, "p": args.p, "eps": args.eps, "delta": args.delta,
           "seed": args.seed, "width": trace.width,
           "envelope": params.width_bound(),
           "phase_ends": list(trace.phase_ends),
           "selected_pairs": len(trace.selected_pairs),
           "shortfall": trace.shortfall, "topped_up": trace.topped_up,
           "frozen": trace.frozen_count, "skipped": len(trace.skipped),
           "retried_ok": trace.retried_ok, "runtime_ms": ms})
    return 0


def _prediction_json(pred) -> None:
    _emit({"formula": pred.formula, "inputs": pred.inputs,
           "value": pred.value, "omitted_terms": pred.omitted_terms})


def _cmd_predict(args) -> int:
    if args.kind == "sparse-upper":
        if args.m_edges is None:
            raise ValueError("sparse-upper needs --m-edges")
        pred = predicted_sparse_upper(args.m_edges)
    else:
        if args.n is None or args.p is None:
            raise ValueError(f"{args.kind} needs --n and --p")
        if args.kind == "dense":
            pred = predicted_dense_width(args.n, args.p)
        elif args.kind == "lower-dense":
            pred = predicted_lower_dense(args.n, args.p, args.g)
        else:
            pred = predicted_sparse_lower(args.n, args.p, args.delta)
    _prediction_json(pred)
    return 0


def _cmd_bounds(args) -> int:
    q = TailBoundQuery(n=args.n, p=args.p, eps=args.eps)
    if args.side == "upper":
        value = binom_upper_bound(q)
        formula = "exp(-n eps^2/(2pq) + n eps^3/(2 p^2 q^2))"
    else:
        value = binom_lower_bound(q)
        formula = ("exp(-n eps^2/(2pq) - 3 sqrt(n eps^2)/(2pq)"
                   " - 4 n eps^3/(p^2 q^2)) / (2 sqrt(2))")
    _emit({"formula": formula,
           "inputs": {"n": args.n, "p": args.p, "eps": args.eps},
           "value": value, "omitted_terms": "none (closed form)"})
    return 0


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out_csv=args.out)
    lines = run_experiment(cfg)
    _emit({"rows": len(lines) - 1, "out_csv": cfg.out_csv})
    return 0


def _add_gen_flags(sp, *, graph_positional: bool) -> None:
    if graph_positional:
        sp.add_argument("graph", nargs="?", help="graph file (optional)")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twinlab")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate a seeded random graph")
    sp.add_argument("--model", choices=("gnp", "cograph", "bipartite"),
                    default="gnp")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--a-count", type=int)
    sp.add_argument("--b-count", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_gen)

    sp = sub.add_parser("contract", help="replay a contraction sequence")
    sp.add_argument("graph")
    sp.add_argument("seq")
    sp.add_argument("--out-trace")
    sp.set_defaults(fn=_cmd_contract)

    sp = sub.add_parser("verify", help="check a sequence stays within width d")
    sp.add_argument("graph")
    sp.add_argument("seq")
    sp.add_argument("--d", type=int, required=True)
    sp.set_defaults(fn=_cmd_verify)

    sp = sub.add_parser("exact", help="branch-and-bound twin-width")
    _add_gen_flags(sp, graph_positional=True)
    sp.add_argument("--node-budget", type=int, default=200_000)
    sp.add_argument("--out-seq")
    sp.set_defaults(fn=_cmd_exact)

    sp = sub.add_parser("greedy", help="greedy contraction upper bound")
    _add_gen_flags(sp, graph_positional=True)
    sp.add_argument("--out-seq")
    sp.set_defaults(fn=_cmd_greedy)

    sp = sub.add_parser("paper-schedule",
                        help="three-phase schedule on G(n,p)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--slack", type=float, default=1.1)
    sp.add_argument("--out-seq")
    sp.add_argument("--out-trace")
    sp.set_defaults(fn=_cmd_paper_schedule)

    sp = sub.add_parser("predict", help="asymptotic width formulas")
    sp.add_argument("kind", choices=("dense", "lower-dense", "sparse-upper",
                                     "sparse-lower"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--g", type=float, default=0.0)
    sp.add_argument("--m-edges", type=int)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.set_defaults(fn=_cmd_predict)

    sp = sub.add_parser("bounds", help="binomial tail bounds")
    sp.add_argument("side", choices=("upper", "lower"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.set_defaults(fn=_cmd_bounds)

    sp = sub.add_parser("experiment", help="run a JSON-configured batch")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help="override the config's out_csv")
    sp.set_defaults(fn=_cmd_experiment)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
