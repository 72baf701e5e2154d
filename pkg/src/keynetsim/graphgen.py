"""Sampling of the intersected key/channel graph.

One trial consumes a single deterministic random stream in a fixed layout:

1. ``n`` uniforms, one per node in node order, deciding the classes;
2. for each class in index order, the key rings of that class's nodes,
   drawn as a batch (``K`` bounded integers per ring, column-major);
3. ``n*(n-1)/2`` uniforms, one per unordered node pair in lexicographic
   order, deciding the channel layer.

The channel uniform of every pair is always drawn, whether or not the pair
shares a key, so the randomness consumed is a fixed function of the class
realization; identical ``(seed, stream index)`` therefore reproduce the same
graph on any platform and under any degree of trial parallelism.

An edge of the output graph exists iff the pair shares at least one key and
its channel uniform falls below the class-pair on-probability.  The key
layer is resolved in bulk through a shared-key index (every pair of rings
holding a common key is a key-layer edge), which produces exactly the same
edge set as testing each channel-on pair individually, because the key test
is deterministic given the rings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ParameterError
from .model import ClassDistribution, KeyProfile, ModelParams

__all__ = [
    "RngStream",
    "rng_stream",
    "sample_classes",
    "sample_rings_batch",
    "sample_key_ring",
    "KeyRing",
    "key_adjacency",
    "IntersectionGraph",
    "LayerSample",
    "generate",
    "generate_layers",
]

# A stream is an ordinary numpy Generator; rng_stream pins how one is built
# from (seed, index) so that the pair fully determines the draw sequence.
RngStream = np.random.Generator


def rng_stream(seed: int, index: int = 0) -> RngStream:
    """Deterministic pseudo-random stream for 64-bit ``seed`` and stream ``index``."""
    if seed < 0 or index < 0:
        raise ParameterError("seed and stream index must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sample_classes(
    n: int, dist: ClassDistribution, rng: RngStream
) -> np.ndarray:
    """Draw one class per node, independently from ``dist``, in node order."""
    if n < 2:
        raise ParameterError("node count must be at least 2")
    cum = np.cumsum(dist.probs)
    u = rng.random(n)
    classes = np.searchsorted(cum, u, side="right")
    return np.minimum(classes, dist.r - 1).astype(np.int32)


def sample_rings_batch(
    k: int, pool: int, m: int, rng: RngStream
) -> np.ndarray:
    """Draw ``m`` independent uniform ``k``-subsets of ``{0, ..., pool-1}``.

    Floyd's sampling algorithm, run column-wise across all ``m`` rings at
    once: at step ``t`` a candidate is drawn uniformly from ``{0, ..., j}``
    with ``j = pool - k + t``, and ``j`` itself is inserted whenever the
    candidate is already in the ring.  Cost is O(k^2) bookkeeping per ring
    and never touches the full pool.  Rows come back sorted.
    """
    k = int(k)
    pool = int(pool)
    m = int(m)
    if k < 1 or pool < 1 or k > pool:
        raise ParameterError(f"ring size {k} invalid for pool size {pool}")
    if m < 0:
        raise ParameterError("ring count must be non-negative")
    chosen = np.empty((m, k), dtype=np.int64)
    for t in range(k):
        j = pool - k + t
        draw = rng.integers(0, j + 1, size=m)
        if t:
            dup = (chosen[:, :t] == draw[:, None]).any(axis=1)
            draw = np.where(dup, j, draw)
        chosen[:, t] = draw
    chosen.sort(axis=1)
    return chosen


@dataclass(frozen=True)
class KeyRing:
    """A node's key identifiers (sorted, duplicate-free) and its class."""

    keys: np.ndarray
    owner_class: int

    def __post_init__(self):
        keys = np.asarray(self.keys, dtype=np.int64)
        if keys.ndim != 1:
            raise ParameterError("key ring must be a flat vector of identifiers")
        keys = np.sort(keys)
        if keys.size and np.any(keys[1:] == keys[:-1]):
            raise ParameterError("key ring identifiers must be distinct")
        keys.setflags(write=False)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "owner_class", int(self.owner_class))

    def __len__(self) -> int:
        return self.keys.size


def sample_key_ring(owner_class: int, keys: KeyProfile, rng: RngStream) -> KeyRing:
    """Draw the key ring of a class-``owner_class`` node."""
    owner_class = int(owner_class)
    if not 0 <= owner_class < keys.r:
        raise ParameterError(f"class index {owner_class} out of range")
    ring = sample_rings_batch(
        int(keys.ring_sizes[owner_class]), keys.pool_size, 1, rng
    )[0]
    return KeyRing(keys=ring, owner_class=owner_class)


def key_adjacency(a: KeyRing, b: KeyRing) -> bool:
    """True iff the two rings share at least one key.

    Probes the smaller ring's elements against a hash set built on the
    larger ring; O(min(K) ) expected.
    """
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    members = set(large.keys.tolist())
    return any(k in members for k in small.keys.tolist())


@dataclass(frozen=True)
class IntersectionGraph:
    """A sampled graph: class labels plus a CSR adjacency structure.

    ``indices[indptr[v]:indptr[v+1]]`` is the sorted neighbor list of node
    ``v``; ``edges_u < edges_v`` list each edge once in lexicographic order.
    """

    n: int
    r: int
    classes: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    edges_u: np.ndarray
    edges_v: np.ndarray

    @property
    def edge_count(self) -> int:
        return self.edges_u.size

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def validate(self) -> None:
        """Assert the structural invariants; test-support, not a hot path."""
        assert self.classes.shape == (self.n,)
        assert self.indptr.shape == (self.n + 1,)
        assert int(self.indptr[-1]) == self.indices.size == 2 * self.edge_count
        assert np.all(self.edges_u < self.edges_v)
        pairs = set(zip(self.edges_u.tolist(), self.edges_v.tolist()))
        assert len(pairs) == self.edge_count
        for v in range(self.n):
            nb = self.neighbors(v)
            assert np.all(np.diff(nb) > 0), "neighbor lists sorted, duplicate-free"
            assert v not in nb, "no self-loops"
            for w in nb.tolist():
                assert (min(v, w), max(v, w)) in pairs

    def to_edge_list_text(self) -> str:
        """Debug dump: ``n r`` header, a line of 1-based class labels, then
        one ``u v`` node-index pair per line."""
        lines = [f"{self.n} {self.r}"]
        lines.append(" ".join(str(int(c) + 1) for c in self.classes))
        lines.extend(
            f"{u} {v}" for u, v in zip(self.edges_u.tolist(), self.edges_v.tolist())
        )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LayerSample:
    """A trial with both constituent layers materialized (test support)."""

    graph: IntersectionGraph
    key_edges: Tuple[np.ndarray, np.ndarray]
    channel_edges: Tuple[np.ndarray, np.ndarray]


_TRIU_CACHE: dict = {}


def _local_pairs(c: int) -> Tuple[np.ndarray, np.ndarray]:
    if c not in _TRIU_CACHE:
        _TRIU_CACHE[c] = np.triu_indices(c, k=1)
    return _TRIU_CACHE[c]


def _shared_key_pairs(
    flat_nodes: np.ndarray, flat_keys: np.ndarray, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """All node pairs (u < v) whose rings share at least one key."""
    order = np.argsort(flat_keys, kind="stable")
    sk = flat_keys[order]
    sn = flat_nodes[order]
    if sk.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    starts = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1]])
    counts = np.diff(np.append(starts, sk.size))
    us = []
    vs = []
    for c in np.unique(counts):
        c = int(c)
        if c < 2:
            continue
        g_starts = starts[counts == c]
        block = sn[g_starts[:, None] + np.arange(c)]
        li, lj = _local_pairs(c)
        a = block[:, li].ravel()
        b = block[:, lj].ravel()
        us.append(np.minimum(a, b))
        vs.append(np.maximum(a, b))
    if not us:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    pid = np.unique(np.concatenate(us) * np.int64(n) + np.concatenate(vs))
    return pid // n, pid % n


def _pair_rank(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Rank of pair (u, v), u < v, in the lexicographic pair enumeration."""
    u = u.astype(np.int64)
    v = v.astype(np.int64)
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def _sample(params: ModelParams, rng: RngStream, keep_channel: bool):
    n = params.n
    pool = params.keys.pool_size
    sizes = params.keys.ring_sizes
    alpha = params.channel.alpha

    classes = sample_classes(n, params.dist, rng)

    node_chunks = []
    key_chunks = []
    for cls in range(params.r):
        members = np.flatnonzero(classes == cls)
        k = int(sizes[cls])
        rings = sample_rings_batch(k, pool, members.size, rng)
        node_chunks.append(np.repeat(members, k))
        key_chunks.append(rings.ravel())
    flat_nodes = np.concatenate(node_chunks)
    flat_keys = np.concatenate(key_chunks)

    cand_u, cand_v = _shared_key_pairs(flat_nodes, flat_keys, n)
    u_chan = rng.random(n * (n - 1) // 2)

    on = u_chan[_pair_rank(cand_u, cand_v, n)] < alpha[classes[cand_u], classes[cand_v]]
    edges_u = cand_u[on]
    edges_v = cand_v[on]

    channel_edges = None
    if keep_channel:
        xs, ys = np.triu_indices(n, k=1)
        g_on = u_chan < alpha[classes[xs], classes[ys]]
        channel_edges = (xs[g_on].astype(np.int64), ys[g_on].astype(np.int64))

    return classes, (cand_u, cand_v), (edges_u, edges_v), channel_edges


def _build_graph(
    n: int,
    r: int,
    classes: np.ndarray,
    edges_u: np.ndarray,
    edges_v: np.ndarray,
) -> IntersectionGraph:
    deg = np.bincount(edges_u, minlength=n) + np.bincount(edges_v, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    src = np.concatenate([edges_u, edges_v])
    dst = np.concatenate([edges_v, edges_u])
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int64)
    for a in (classes, indptr, indices, edges_u, edges_v):
        a.setflags(write=False)
    return IntersectionGraph(
        n=n,
        r=r,
        classes=classes,
        indptr=indptr,
        indices=indices,
        edges_u=edges_u,
        edges_v=edges_v,
    )


def generate(params: ModelParams, rng: RngStream) -> IntersectionGraph:
    """Sample one graph: classes, key rings, channel states, intersected edges."""
    classes, _, (edges_u, edges_v), _ = _sample(params, rng, keep_channel=False)
    return _build_graph(params.n, params.r, classes, edges_u, edges_v)


def generate_layers(params: ModelParams, rng: RngStream) -> LayerSample:
    """Like :func:`generate`, but also materialize both constituent layers.

    Consumes the stream identically to :func:`generate`, so the contained
    graph is the one :func:`generate` would have produced for the same
    stream.  Intended for tests of the intersection law; the channel layer
    costs O(n^2) memory.
    """
    classes, key_edges, (edges_u, edges_v), channel_edges = _sample(
        params, rng, keep_channel=True
    )
    graph = _build_graph(params.n, params.r, classes, edges_u, edges_v)
    return LayerSample(graph=graph, key_edges=key_edges, channel_edges=channel_edges)
