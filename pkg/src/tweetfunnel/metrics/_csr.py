"""Compressed adjacency arrays shared by the compiled and pure kernels.

Nodes are numbered by sorted (kind, id) key so the array layout, and with
it every kernel's arithmetic order, is identical regardless of insertion
order or backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph import MultimodalGraph, NodeKey


@dataclass
class CsrView:
    """Forward, reverse, and undirected adjacency in CSR form."""

    keys: list[NodeKey]
    index: dict[NodeKey, int]
    fwd_indptr: np.ndarray
    fwd_indices: np.ndarray
    rev_indptr: np.ndarray
    rev_indices: np.ndarray
    und_indptr: np.ndarray
    und_indices: np.ndarray

    @property
    def n(self) -> int:
        return len(self.keys)


def _to_csr(n: int, adjacency: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(n + 1, dtype=np.int64)
    total = 0
    for i, neighbors in enumerate(adjacency):
        neighbors.sort()
        total += len(neighbors)
        indptr[i + 1] = total
    indices = np.empty(total, dtype=np.int64)
    pos = 0
    for neighbors in adjacency:
        for v in neighbors:
            indices[pos] = v
            pos += 1
    return indptr, indices


def csr_view(graph: MultimodalGraph) -> CsrView:
    """Build simple directed adjacency (edge kinds collapsed, deduped)."""
    keys = sorted(graph.node_keys())
    index = {key: i for i, key in enumerate(keys)}
    n = len(keys)
    fwd_sets: list[set[int]] = [set() for _ in range(n)]
    for edge in graph.edges():
        fwd_sets[index[edge.source]].add(index[edge.target])
    fwd = [sorted(s) for s in fwd_sets]
    rev: list[list[int]] = [[] for _ in range(n)]
    und_sets: list[set[int]] = [set() for _ in range(n)]
    for u, neighbors in enumerate(fwd):
        for v in neighbors:
            rev[v].append(u)
            und_sets[u].add(v)
            und_sets[v].add(u)
    und = [sorted(s) for s in und_sets]

    fwd_indptr, fwd_indices = _to_csr(n, fwd)
    rev_indptr, rev_indices = _to_csr(n, rev)
    und_indptr, und_indices = _to_csr(n, und)
    return CsrView(
        keys, index, fwd_indptr, fwd_indices, rev_indptr, rev_indices,
        und_indptr, und_indices,
    )
