"""Benchmark the compiled kernels against the pure-Python fallback.

Builds one random directed graph, runs every kernel through both
backends on identical CSR arrays, verifies the outputs match bit for
bit, and prints a timing table.

    python3 benchmarks/bench_kernels.py --nodes 400 --degree 6 --repeats 3
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from tweetfunnel.graph import MENTIONS, MultimodalGraph, user_key
from tweetfunnel.metrics import _kernels_py
from tweetfunnel.metrics._csr import csr_view

try:
    from tweetfunnel.metrics import _kernels as _compiled
except ImportError:
    _compiled = None


def build_graph(nodes: int, degree: int, seed: int) -> MultimodalGraph:
    rng = random.Random(seed)
    graph = MultimodalGraph()
    for i in range(nodes):
        graph.ensure_node(user_key(f"u{i:05d}"), f"u{i:05d}")
    for i in range(nodes):
        for _ in range(degree):
            j = rng.randrange(nodes)
            if j != i:
                graph.add_edge_raw(
                    user_key(f"u{i:05d}"), user_key(f"u{j:05d}"), MENTIONS
                )
    return graph


def bench(fn, repeats: int) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        started = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - started)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--nodes", type=int, default=400)
    parser.add_argument("--degree", type=int, default=6,
                        help="outgoing edges drawn per node")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--layout-iterations", type=int, default=50)
    args = parser.parse_args()

    if _compiled is None:
        print("compiled kernels are not built; run pip install -e . first")
        return 1

    view = csr_view(build_graph(args.nodes, args.degree, args.seed))
    n = view.n
    sources = np.arange(n, dtype=np.int64)
    deg = (np.diff(view.fwd_indptr) + np.diff(view.rev_indptr)).astype(np.int64)
    esrc = np.repeat(np.arange(n, dtype=np.int64), np.diff(view.fwd_indptr))
    edst = view.fwd_indices
    rng = random.Random(args.seed)
    px0 = np.array([rng.uniform(-1, 1) for _ in range(n)])
    py0 = np.array([rng.uniform(-1, 1) for _ in range(n)])

    def betweenness(backend):
        def run():
            out = np.zeros(n)
            backend.betweenness_accumulate(
                n, view.fwd_indptr, view.fwd_indices,
                view.rev_indptr, view.rev_indices, sources, out,
            )
            return out
        return run

    def closeness(backend):
        def run():
            out = np.zeros(n)
            backend.closeness_all(n, view.fwd_indptr, view.fwd_indices, out)
            return out
        return run

    def eigenvector(backend):
        def run():
            out = np.zeros(n)
            backend.eigenvector_iterate(
                n, view.und_indptr, view.und_indices, out, 1.0, 1e-9, 1000
            )
            return out
        return run

    def layout(backend):
        def run():
            px, py = px0.copy(), py0.copy()
            backend.layout_iterate(
                px, py, deg, esrc, edst,
                args.layout_iterations, 10.0, 1.0, 0.5, 10.0,
            )
            return np.concatenate([px, py])
        return run

    edges = int(view.fwd_indices.shape[0])
    print(f"graph: {n} nodes, {edges} edges, repeats={args.repeats}")
    print(f"{'kernel':<14} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for name, make in (
        ("betweenness", betweenness),
        ("closeness", closeness),
        ("eigenvector", eigenvector),
        ("layout", layout),
    ):
        pure_time, pure_out = bench(make(_kernels_py), args.repeats)
        fast_time, fast_out = bench(make(_compiled), args.repeats)
        if not np.array_equal(pure_out, fast_out):
            print(f"{name}: BACKEND MISMATCH")
            return 1
        print(
            f"{name:<14} {pure_time * 1e3:>10.2f}ms {fast_time * 1e3:>10.2f}ms "
            f"{pure_time / fast_time:>8.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
