"""Reproducible Monte-Carlo width experiments.

A single JSON config describes a grid of (n, p) points, a seed list,
and the strategies to run; the harness emits one CSV row per
(point, seed, strategy).  Everything that lands in the CSV is a pure
function of the config (the runtime column aside), so identical configs
give identical output — trials that fail are recorded in their row's
status field rather than aborting the batch.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import K
from .numerics import predicted_dense_width, predicted_lower_dense
from .randgen import RandomGraphSpec, gnp
from .solver import exact_twin_width, greedy_sequence
from .strategy import run_paper_schedule, schedule_params
from .trigraph import Trigraph

STRATEGIES = ("greedy", "exact", "paper-schedule")
CSV_HEADER = ("n,p,seed,strategy,width,predicted_upper,predicted_lower,"
              "certified_lb,runtime_ms,status")

_EVAL_CHUNK = 1 << 17


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (see README for the JSON schema)."""

    points: tuple[tuple[int, float], ...]
    strategies: tuple[str, ...]
    seeds: tuple[int, ...]
    out_csv: str | None = None
    seq_dir: str | None = None
    workers: int = 1
    exact_cap: int = 64
    cert_cap: int = 2000
    node_budget: int = 200_000
    eps: float = 0.1
    delta: float = 0.25

    def __post_init__(self):
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("duplicate seeds in config")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}; "
                                 f"choose from {', '.join(STRATEGIES)}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategies in config")
        for n, p in self.points:
            if n < 1:
                raise ValueError(f"grid point has n={n} < 1")
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"grid point has p={p} outside [0,1]")
            if "exact" in self.strategies and n > self.exact_cap:
                raise ValueError(
                    f"exact strategy is capped at n <= {self.exact_cap}, "
                    f"grid has n={n}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"points", "strategies", "seeds", "out_csv", "seq_dir",
                 "workers", "exact_cap", "cert_cap", "node_budget",
                 "eps", "delta"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        try:
            points = tuple((int(pt["n"]), float(pt["p"])) for pt in d["points"])
        except (KeyError, TypeError) as e:
            raise ValueError(f"each grid point needs 'n' and 'p': {e}") from e
        kwargs = {k: d[k] for k in known - {"points", "strategies", "seeds"}
                  if k in d}
        return cls(points=points,
                   strategies=tuple(d.get("strategies", ("greedy",))),
                   seeds=tuple(int(s) for s in d.get("seeds", ())),
                   **kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _all_pair_degrees(g: Trigraph) -> np.ndarray:
    """Merge red degree of every alive pair, chunked to bound memory."""
    labels = np.array(g.alive_vertices(), dtype=np.int64) - 1
    iu, iv = np.triu_indices(labels.size, 1)
    us, vs = labels[iu], labels[iv]
    out = np.empty(us.size, dtype=np.int64)
    for lo in range(0, us.size, _EVAL_CHUNK):
        hi = min(lo + _EVAL_CHUNK, us.size)
        out[lo:hi] = K.eval_pairs(g.adj, g.alive, us[lo:hi], vs[lo:hi])
    return out


def max_certifiable_d(g: Trigraph, b: int) -> int:
    """Largest d for which the low-pair certificate fires with budget b.

    Fewer than b pairs sit strictly below b + d exactly when the b-th
    smallest pair degree is at least b + d, so the best d is that order
    statistic minus b (0 when no d >= 1 is certifiable).
    """
    if b < 1 or g.alive_count() < b + 2:
        return 0
    degs = _all_pair_degrees(g)
    if degs.size < b:
        return 0
    rb = int(np.partition(degs, b - 1)[b - 1])
    return max(rb - b, 0)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _seq_path(seq_dir: str, n: int, p: float, seed: int, strategy: str) -> Path:
    return Path(seq_dir) / f"n{n}_p{p:g}_s{seed}_{strategy}.seq"


def _run_cell(cfg: ExperimentConfig, n: int, p: float, seed: int) -> list[str]:
    """All rows for one (point, seed): the graph, predictions, and the
    certificate are shared across strategies."""
    from .contraction import write_sequence

    g = gnp(RandomGraphSpec(n, p, seed))
    try:
        pred_up = _fmt(predicted_dense_width(n, p).value)
        pred_lo = _fmt(predicted_lower_dense(n, p, 0.0).value)
    except ValueError:
        pred_up = pred_lo = ""

    cert = ""
    if n <= cfg.cert_cap:
        b = math.ceil(n ** 0.55)
        d = max_certifiable_d(g, b)
        if d >= 1:
            cert = str(d)

    rows = []
    for strategy in cfg.strategies:
        t0 = time.perf_counter()
        width: str
        status = "ok"
        seq = None
        try:
            if strategy == "greedy":
                seq, w = greedy_sequence(g)
                width = str(w)
            elif strategy == "exact":
                res = exact_twin_width(g, node_budget=cfg.node_budget)
                seq, width = res.witness, str(res.value)
                if not res.exact:
                    status = "inexact"
            else:
                params = schedule_params(n, p, cfg.eps, cfg.delta)
                seq, trace = run_paper_schedule(g, params)
                width = str(trace.width)
        except ValueError as e:
            width = ""
            status = f"error: {e}"
        ms = round((time.perf_counter() - t0) * 1000)
        if seq is not None and cfg.seq_dir is not None:
            write_sequence(_seq_path(cfg.seq_dir, n, p, seed, strategy), seq)
        rows.append(f"{n},{p:g},{seed},{strategy},{width},{pred_up},"
                    f"{pred_lo},{cert},{ms},{status}")
    return rows


def _run_cell_star(args) -> list[str]:
    return _run_cell(*args)


def run_experiment(cfg: ExperimentConfig) -> list[str]:
    """Execute the grid and return all CSV lines (header first).

    Writes ``cfg.out_csv`` when set; sequence files go to ``cfg.seq_dir``
    when set, one per row, named n{n}_p{p}_s{seed}_{strategy}.seq.
    """
    if cfg.seq_dir is not None:
        Path(cfg.seq_dir).mkdir(parents=True, exist_ok=True)
    cells = [(cfg, n, p, seed) for n, p in cfg.points for seed in cfg.seeds]
    if cfg.workers == 1 or len(cells) <= 1:
        results = [_run_cell_star(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_cell_star, cells))
    lines = [CSV_HEADER]
    for rows in results:
        lines.extend(rows)
    if cfg.out_csv is not None:
        Path(cfg.out_csv).parent.mkdir(parents=True, exist_ok=True)
        with open(cfg.out_csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return lines
