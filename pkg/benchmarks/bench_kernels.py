"""Benchmark the compiled kernels against the numpy fallback.

Runs each hot kernel on the same inputs under both backends and prints a
table of timings plus the speedup.  The compiled extension is optional;
if it is missing only the fallback column appears.

    python3 benchmarks/bench_kernels.py [--n 20000] [--p 0.5] [--repeat 3]
"""

import argparse
import time

import numpy as np

import twinlab._kernels_py as kpy

try:
    import twinlab._kernels_cy as kcy
except ImportError:
    kcy = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n, p, repeat):
    W = kpy.words_for(n)
    seed = 20260816
    backends = [("python", kpy)] + ([("compiled", kcy)] if kcy else [])
    rows = []

    def add(name, runs):
        rows.append((name, runs))

    # fill_gnp
    runs = {}
    for bname, K in backends:
        adj = np.zeros((n, W, 2), dtype=np.uint64)
        runs[bname] = timeit(lambda K=K, adj=adj: K.fill_gnp(adj, n, p, seed), repeat)
    add(f"fill_gnp(n={n})", runs)

    # shared graph state for the rest
    adj = np.zeros((n, W, 2), dtype=np.uint64)
    kpy.fill_gnp(adj, n, p, seed)
    alive = kpy.pack_index_mask(range(n), n)
    rdeg = np.zeros(n, dtype=np.int64)
    sizes = np.ones(n, dtype=np.int64)

    # scan_low_pairs over a tail block, like the schedule's opening scan
    k_rows = max(n // 18, 64)
    rows_arr = np.arange(n - k_rows, n, dtype=np.int64)
    colmask = kpy.pack_index_mask(range(n - k_rows), n)
    thr = 2 * p * (1 - p) * (n - k_rows) * 0.98
    runs = {}
    for bname, K in backends:
        runs[bname] = timeit(
            lambda K=K: K.scan_low_pairs(adj, alive, rows_arr, colmask, thr), repeat)
    add(f"scan_low_pairs({k_rows} rows)", runs)

    # eval_pairs on a large batch
    rng = np.random.default_rng(1)
    us = rng.integers(0, n - 1, size=200_000).astype(np.int64)
    vs = rng.integers(0, n, size=200_000).astype(np.int64)
    vs = np.where(vs == us, us + 1, vs)
    runs = {}
    for bname, K in backends:
        runs[bname] = timeit(lambda K=K: K.eval_pairs(adj, alive, us, vs), repeat)
    add("eval_pairs(200k pairs)", runs)

    # bulk_adjacent_pairs on fresh copies
    npairs = n // 4
    base = np.arange(npairs, dtype=np.int64)
    pairs = np.stack([2 * base, 2 * base + 1], axis=1)
    runs = {}
    for bname, K in backends:
        def run(K=K):
            a = adj.copy()
            al = alive.copy()
            rd = rdeg.copy()
            sz = sizes.copy()
            K.bulk_adjacent_pairs(a, al, rd, sz, pairs)
        runs[bname] = timeit(run, repeat)
    add(f"bulk_adjacent_pairs({npairs})", runs)

    # contract_step scatter on fresh copies
    steps = [(2 * i, 2 * i + 1) for i in range(min(400, n // 2))]
    runs = {}
    for bname, K in backends:
        def run(K=K):
            a = adj.copy()
            al = alive.copy()
            rd = rdeg.copy()
            sz = sizes.copy()
            for u, v in steps:
                K.contract_step(a, al, rd, sz, u, v)
        runs[bname] = timeit(run, repeat)
    add(f"contract_step x{len(steps)}", runs)

    width = max(len(r[0]) for r in rows) + 2
    header = f"{'kernel':<{width}}{'python':>12}"
    if kcy:
        header += f"{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, runs in rows:
        line = f"{name:<{width}}{runs['python'] * 1000:>10.1f}ms"
        if kcy:
            spd = runs["python"] / runs["compiled"] if runs["compiled"] else float("inf")
            line += f"{runs['compiled'] * 1000:>10.1f}ms{spd:>9.1f}x"
        print(line)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kcy is None:
        print("compiled kernels not available; timing the fallback only")
    bench(args.n, args.p, args.repeat)
