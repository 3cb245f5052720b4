"""Centrality measures and force-directed layout for interaction graphs.

Hot loops live in a compiled extension with a pure-Python fallback picked
at import. Both backends share the CSR arrays from _csr and produce
bit-identical numbers; set TWEETFUNNEL_PURE_KERNELS=1 to force the
fallback (useful for benchmarking and parity checks).
"""

from __future__ import annotations

import os
import random
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import EigenvectorNonConvergence
from ..graph import MultimodalGraph, NodeKey
from ._csr import CsrView, csr_view

if os.environ.get("TWEETFUNNEL_PURE_KERNELS") == "1":
    from . import _kernels_py as _kernels
else:
    try:
        from . import _kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _kernels  # type: ignore[no-redef]

KERNEL_BACKEND: str = _kernels.BACKEND

# layout constants, fixed for deterministic output
REPULSION = 10.0
GRAVITY = 1.0
STEP_CAP = 10.0
DAMPING = 0.5

EIGEN_TOL = 1e-9
EIGEN_MAX_ITER = 1000

# sources per betweenness work unit; constant so the partial-sum order,
# and with it the floating-point result, never depends on worker count
_CHUNK = 64


@dataclass
class NodeMetrics:
    degree_in: int
    degree_out: int
    degree_total: int
    betweenness: float
    closeness: float
    eigenvector: float


@dataclass
class CentralityReport:
    """Per-node centrality table plus eigenvector solver diagnostics."""

    metrics: dict[NodeKey, NodeMetrics]
    eigenvector_iterations: int
    eigenvector_converged: bool


@dataclass
class LayoutResult:
    positions: dict[NodeKey, tuple[float, float]]
    iterations_run: int
    final_max_displacement: float


def degree_centrality(graph: MultimodalGraph) -> dict[NodeKey, tuple[int, int, int]]:
    """Per-node (in, out, total) over distinct directed edges."""
    out = {}
    for key in graph.node_keys():
        d_in = graph.in_degree(key)
        d_out = graph.out_degree(key)
        out[key] = (d_in, d_out, d_in + d_out)
    return out


def _betweenness_chunk(view: CsrView, sources: np.ndarray) -> np.ndarray:
    partial = np.zeros(view.n, dtype=np.float64)
    _kernels.betweenness_accumulate(
        view.n, view.fwd_indptr, view.fwd_indices,
        view.rev_indptr, view.rev_indices, sources, partial,
    )
    return partial


def betweenness_centrality(
    graph: MultimodalGraph, workers: int = 1,
) -> dict[NodeKey, float]:
    """Shortest-path betweenness (directed, unweighted, unnormalized).

    Parallelizes over fixed-size source chunks; partials are summed in
    chunk order, so the result is independent of `workers`.
    """
    view = csr_view(graph)
    n = view.n
    scores = np.zeros(n, dtype=np.float64)
    if n > 2 and view.fwd_indices.shape[0] > 0:
        chunks = [
            np.arange(lo, min(lo + _CHUNK, n), dtype=np.int64)
            for lo in range(0, n, _CHUNK)
        ]
        if workers <= 1 or len(chunks) == 1:
            partials = [_betweenness_chunk(view, chunk) for chunk in chunks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                partials = list(
                    pool.map(lambda chunk: _betweenness_chunk(view, chunk), chunks)
                )
        for partial in partials:
            scores += partial
    return {key: float(scores[i]) for i, key in enumerate(view.keys)}


def closeness_centrality(graph: MultimodalGraph) -> dict[NodeKey, float]:
    """Component-corrected outbound closeness in [0, 1]."""
    view = csr_view(graph)
    out = np.zeros(view.n, dtype=np.float64)
    if view.n > 0:
        _kernels.closeness_all(view.n, view.fwd_indptr, view.fwd_indices, out)
    return {key: float(out[i]) for i, key in enumerate(view.keys)}


def _eigenvector(graph: MultimodalGraph) -> tuple[dict[NodeKey, float], int, bool]:
    view = csr_view(graph)
    scores = np.zeros(view.n, dtype=np.float64)
    if view.n == 0 or view.und_indices.shape[0] == 0:
        # no edges: stated all-zeros convention
        return {key: 0.0 for key in view.keys}, 0, True
    iterations, converged = _kernels.eigenvector_iterate(
        view.n, view.und_indptr, view.und_indices, scores,
        1.0, EIGEN_TOL, EIGEN_MAX_ITER,
    )
    result = {key: float(scores[i]) for i, key in enumerate(view.keys)}
    return result, int(iterations), bool(converged)


def eigenvector_centrality(graph: MultimodalGraph) -> dict[NodeKey, float]:
    """Power iteration on the undirected view, max-normalized to [0, 1].

    Warns with EigenvectorNonConvergence when the iteration cap is hit;
    the last iterate is still returned.
    """
    scores, iterations, converged = _eigenvector(graph)
    if not converged:
        warnings.warn(
            EigenvectorNonConvergence(
                f"eigenvector iteration stopped at {iterations} "
                f"iterations above tolerance {EIGEN_TOL}"
            ),
            stacklevel=2,
        )
    return scores


def compute_centrality_report(
    graph: MultimodalGraph, workers: int = 1,
) -> CentralityReport:
    degrees = degree_centrality(graph)
    betweenness = betweenness_centrality(graph, workers=workers)
    closeness = closeness_centrality(graph)
    eigen, iterations, converged = _eigenvector(graph)
    if not converged:
        warnings.warn(
            EigenvectorNonConvergence(
                f"eigenvector iteration stopped at {iterations} "
                f"iterations above tolerance {EIGEN_TOL}"
            ),
            stacklevel=2,
        )
    metrics = {}
    for key, (d_in, d_out, d_total) in degrees.items():
        metrics[key] = NodeMetrics(
            degree_in=d_in,
            degree_out=d_out,
            degree_total=d_total,
            betweenness=betweenness[key],
            closeness=closeness[key],
            eigenvector=eigen[key],
        )
    return CentralityReport(metrics, iterations, converged)


def layout_force(
    graph: MultimodalGraph,
    iterations: int,
    seed: int = 0,
    *,
    initial: dict[NodeKey, tuple[float, float]] | None = None,
) -> LayoutResult:
    """Force-directed layout: linear attraction along edges, repulsion
    k_r(deg_u+1)(deg_v+1)/d between all pairs, gravity toward the origin
    scaled by (deg+1) and distance, damped steps capped at 10 units.

    Initial positions are drawn from `seed` over nodes in sorted key
    order; entries in `initial` override the seeded position. Output is
    deterministic for a fixed (graph, iterations, seed, initial).
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    view = csr_view(graph)
    n = view.n
    rng = random.Random(seed)
    px = np.zeros(n, dtype=np.float64)
    py = np.zeros(n, dtype=np.float64)
    for i, key in enumerate(view.keys):
        x = rng.uniform(-1.0, 1.0)
        y = rng.uniform(-1.0, 1.0)
        if initial is not None and key in initial:
            x, y = initial[key]
        px[i] = x
        py[i] = y
    deg = np.zeros(n, dtype=np.int64)
    for i, key in enumerate(view.keys):
        deg[i] = graph.total_degree(key)
    esrc = np.repeat(np.arange(n, dtype=np.int64), np.diff(view.fwd_indptr))
    edst = view.fwd_indices
    iterations_run, max_disp = _kernels.layout_iterate(
        px, py, deg, esrc, edst, iterations,
        REPULSION, GRAVITY, DAMPING, STEP_CAP,
    )
    positions = {
        key: (float(px[i]), float(py[i])) for i, key in enumerate(view.keys)
    }
    return LayoutResult(positions, int(iterations_run), float(max_disp))
