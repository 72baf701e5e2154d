"""Structural queries on a sampled graph.

All functions are read-only; a graph can be analyzed concurrently from any
number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .graphgen import IntersectionGraph

__all__ = [
    "TrialOutcome",
    "count_isolated",
    "connectivity",
    "class_edge_audit",
    "analyze",
]


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial statistics extracted from one sampled graph."""

    isolated_count: int
    class_isolated_counts: np.ndarray
    is_connected: bool
    component_count: int
    largest_component: int
    intra_class_edge_counts: np.ndarray
    edge_count: int


def count_isolated(g: IntersectionGraph) -> Tuple[np.ndarray, int]:
    """Count degree-zero nodes, per class and in total."""
    isolated = g.degrees() == 0
    per_class = np.bincount(g.classes[isolated], minlength=g.r).astype(np.int64)
    return per_class, int(np.count_nonzero(isolated))


def connectivity(g: IntersectionGraph) -> Tuple[bool, int, int]:
    """Component census via union-find with path compression and union by size.

    Returns ``(is_connected, component_count, largest_component)``.
    """
    n = g.n
    parent = list(range(n))
    size = [1] * n
    components = n

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in zip(g.edges_u.tolist(), g.edges_v.tolist()):
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        components -= 1

    largest = max(size[i] for i in range(n) if parent[i] == i)
    return components == 1, components, largest


def class_edge_audit(g: IntersectionGraph) -> np.ndarray:
    """Symmetric r x r matrix of edge counts by (class, class) pair.

    Diagonal entries count intra-class edges; the sum over the upper
    triangle including the diagonal equals the total edge count.
    """
    r = g.r
    audit = np.zeros((r, r), dtype=np.int64)
    if g.edge_count:
        cu = g.classes[g.edges_u]
        cv = g.classes[g.edges_v]
        lo = np.minimum(cu, cv)
        hi = np.maximum(cu, cv)
        np.add.at(audit, (lo, hi), 1)
    return audit + np.triu(audit, k=1).T


def analyze(g: IntersectionGraph) -> TrialOutcome:
    """Compute the full per-trial outcome for one graph."""
    per_class, total = count_isolated(g)
    is_connected, components, largest = connectivity(g)
    audit = class_edge_audit(g)
    return TrialOutcome(
        isolated_count=total,
        class_isolated_counts=per_class,
        is_connected=is_connected,
        component_count=components,
        largest_component=largest,
        intra_class_edge_counts=np.diagonal(audit).copy(),
        edge_count=g.edge_count,
    )
