"""Slow-but-exact reference implementations used by the test suite.

Nothing here belongs on a hot path.  The routines answer the same questions
as the production code (key-sharing probabilities, connectivity, sampled
edge frequencies) by deliberately different means: exact rational
arithmetic, plain depth-first search, brute-force resampling.  Tests compare
the fast implementations against these.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import TYPE_CHECKING, Tuple

import mpmath
import numpy as np

from .errors import ParameterError

if TYPE_CHECKING:
    from .graphgen import IntersectionGraph
    from .model import ModelParams

__all__ = [
    "exact_key_prob",
    "combinatorial_bound_check",
    "dfs_connectivity",
    "exhaustive_edge_distribution",
    "pair_adjacency_frequency",
]


def _falling(start: int, count: int) -> int:
    """Product ``start * (start-1) * ... * (start-count+1)`` as an exact int."""
    out = 1
    for t in range(count):
        out *= start - t
    return out


def exact_key_prob(ki: int, kj: int, pool: int) -> Fraction:
    """Exact rational key-sharing probability between rings of ``ki`` and ``kj`` keys.

    Evaluates ``1 - C(pool-ki, kj) / C(pool, kj)`` with arbitrary-precision
    integers; the binomial ratio reduces to a ratio of falling factorials so
    no full factorial is ever formed.  This is the reference for the
    floating-point tolerance of :func:`keynetsim.model.pairwise_key_prob`.
    """
    ki = int(ki)
    kj = int(kj)
    pool = int(pool)
    if pool < 1:
        raise ParameterError("pool size must be positive")
    if ki < 1 or kj < 1:
        raise ParameterError("ring sizes must be at least 1")
    if ki > pool or kj > pool:
        raise ParameterError(
            f"ring sizes ({ki}, {kj}) may not exceed the pool size {pool}"
        )
    if ki + kj > pool:
        return Fraction(1)
    num = _falling(pool - ki, kj)
    den = _falling(pool, kj)
    return Fraction(den - num, den)


def combinatorial_bound_check(ki: int, kj: int, pool: int, a: float) -> bool:
    """Check ``C(pool-ceil(a*ki), kj)/C(pool, kj) <= (C(pool-ki, kj)/C(pool, kj))^a``.

    The inequality is a theorem for every valid input with ``a >= 1``; a
    ``False`` return therefore signals a bug in whichever side produced it.
    Integral exponents are compared in exact rational arithmetic, fractional
    ones through 60-digit logarithms.
    """
    ki = int(ki)
    kj = int(kj)
    pool = int(pool)
    a = float(a)
    if a < 1.0:
        raise ParameterError("exponent must be at least 1")
    if ki < 1 or kj < 1 or pool < 1:
        raise ParameterError("ring and pool sizes must be positive")
    ceil_aki = math.ceil(a * ki)
    if ceil_aki + kj > pool:
        raise ParameterError(
            f"ceil(a*ki) + kj = {ceil_aki + kj} exceeds the pool size {pool}"
        )
    lhs = Fraction(_falling(pool - ceil_aki, kj), _falling(pool, kj))
    base = Fraction(_falling(pool - ki, kj), _falling(pool, kj))
    if lhs == 0:
        return True
    if a == int(a):
        return lhs <= base ** int(a)
    with mpmath.workdps(60):
        return mpmath.log(mpmath.mpf(lhs.numerator) / lhs.denominator) <= a * mpmath.log(
            mpmath.mpf(base.numerator) / base.denominator
        )


def dfs_connectivity(g: "IntersectionGraph") -> Tuple[bool, int]:
    """Component census by iterative depth-first search.

    Independent check for the union-find census in
    :func:`keynetsim.analysis.connectivity`.
    """
    n = g.n
    seen = np.zeros(n, dtype=bool)
    components = 0
    for root in range(n):
        if seen[root]:
            continue
        components += 1
        stack = [root]
        seen[root] = True
        while stack:
            v = stack.pop()
            for w in g.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
    return components == 1, components


def exhaustive_edge_distribution(
    params: "ModelParams", samples: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Empirical adjacency frequency of a two-node network, per class pair.

    Repeatedly draws the two-node graph (classes, rings, channel) and
    tallies adjacency conditioned on the drawn class pair.  Returns
    ``(freq, counts)`` where both are symmetric ``r x r`` arrays; ``freq``
    entries with zero count are NaN.
    """
    from .graphgen import generate

    if params.n != 2:
        raise ParameterError("edge distribution oracle requires a two-node model")
    r = params.r
    hits = np.zeros((r, r), dtype=np.int64)
    counts = np.zeros((r, r), dtype=np.int64)
    for _ in range(int(samples)):
        g = generate(params, rng)
        i, j = int(g.classes[0]), int(g.classes[1])
        lo, hi = min(i, j), max(i, j)
        counts[lo, hi] += 1
        if g.edge_count:
            hits[lo, hi] += 1
    counts = counts + np.triu(counts, k=1).T
    hits = hits + np.triu(hits, k=1).T
    with np.errstate(invalid="ignore"):
        freq = np.where(counts > 0, hits / np.maximum(counts, 1), np.nan)
    return freq, counts


def pair_adjacency_frequency(
    params: "ModelParams", i: int, j: int, samples: int, rng: np.random.Generator
) -> float:
    """Empirical frequency of adjacency between fresh class-``i`` / class-``j`` nodes.

    Samples ``samples`` independent (ring, ring, channel) triples in bulk and
    returns the fraction that are adjacent in the intersected model.  Used to
    validate the sampler against ``alpha[i, j] * p[i, j]``.
    """
    from .graphgen import sample_rings_batch

    sizes = params.keys.ring_sizes
    pool = params.keys.pool_size
    alpha_ij = float(params.channel.alpha[i, j])
    ki = int(sizes[i])
    kj = int(sizes[j])
    samples = int(samples)
    hits = 0
    chunk = 100_000
    for start in range(0, samples, chunk):
        m = min(chunk, samples - start)
        on = rng.random(m) < alpha_ij
        a = sample_rings_batch(ki, pool, m, rng)
        b = sample_rings_batch(kj, pool, m, rng)
        # A shared key shows up as an adjacent duplicate in the row-sorted
        # concatenation (each ring is internally duplicate-free).
        both = np.sort(np.concatenate([a, b], axis=1), axis=1)
        share = (both[:, 1:] == both[:, :-1]).any(axis=1)
        hits += int(np.count_nonzero(on & share))
    return hits / samples
