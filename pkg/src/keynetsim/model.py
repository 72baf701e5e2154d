"""Exact probability computations for the two-layer network model.

A network of ``n`` sensors is built from two independent random layers on a
common class structure:

* a key layer, where a class-``i`` node holds ``K_i`` keys drawn uniformly
  without replacement from a pool of ``P`` keys and two nodes are linked
  when their key rings intersect;
* a channel layer, where the link between a class-``i`` and a class-``j``
  node is on independently with probability ``alpha[i][j]``.

The operational graph keeps an edge only when both layers have it.  This
module holds the closed-form quantities of that model: the pairwise
key-sharing probability ``p_ij``, the per-class mean edge probabilities
``lambda_i`` (key layer alone) and ``Lambda_i`` (both layers), the minimizing
class ``m`` with its companions ``d`` and ``s``, the scaling constant
``c_n = n * Lambda_m / log(n)``, and the first moments of the isolated-node
counts.  Everything here is deterministic and cheap; sampling lives in
:mod:`keynetsim.graphgen`.

Class indices in this module are 0-based; the command-line layer renders
them 1-based for human consumption.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import ParameterError

__all__ = [
    "ClassDistribution",
    "KeyProfile",
    "ChannelMatrix",
    "ModelParams",
    "DerivedQuantities",
    "Prediction",
    "pairwise_key_prob",
    "derive",
    "expected_isolated",
    "expected_class_m_isolated",
    "critical_threshold",
    "theorem_prediction",
    "linked_key_profile",
]

_PROB_SUM_TOL = 1e-12
_CRITICAL_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ClassDistribution:
    """Probability distribution over the ``r`` node classes."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ParameterError("class probabilities must be a non-empty vector")
        if not np.all(probs > 0.0):
            raise ParameterError("every class probability must be strictly positive")
        if abs(float(probs.sum()) - 1.0) > _PROB_SUM_TOL:
            raise ParameterError(
                f"class probabilities must sum to 1 (got {probs.sum()!r})"
            )
        object.__setattr__(self, "probs", _readonly(probs))

    @property
    def r(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class KeyProfile:
    """Per-class key ring sizes ``K_1 <= ... <= K_r`` and the pool size ``P``.

    The largest ring may not exceed half the pool; this keeps the sharing
    probability formula in its non-degenerate branch for sampled networks.
    """

    ring_sizes: np.ndarray
    pool_size: int

    def __post_init__(self):
        sizes = np.asarray(self.ring_sizes, dtype=np.int64)
        pool = int(self.pool_size)
        if sizes.ndim != 1 or sizes.size < 1:
            raise ParameterError("ring sizes must be a non-empty vector")
        if pool < 1:
            raise ParameterError("pool size must be a positive integer")
        if sizes[0] < 1:
            raise ParameterError("ring sizes must be at least 1")
        if np.any(np.diff(sizes) < 0):
            raise ParameterError("ring sizes must be sorted non-decreasing")
        if 2 * int(sizes[-1]) > pool:
            raise ParameterError(
                f"largest ring size {int(sizes[-1])} exceeds half the pool ({pool})"
            )
        object.__setattr__(self, "ring_sizes", _readonly(sizes))
        object.__setattr__(self, "pool_size", pool)

    @property
    def r(self) -> int:
        return self.ring_sizes.size


@dataclass(frozen=True)
class ChannelMatrix:
    """Symmetric matrix of channel-on probabilities.

    Entries of exactly 0 and 1 are admitted: 0 models a permanently severed
    class pair and 1 the fully visible degeneration.
    """

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.ndim != 2 or alpha.shape[0] != alpha.shape[1] or alpha.shape[0] < 1:
            raise ParameterError("channel matrix must be square and non-empty")
        if not np.array_equal(alpha, alpha.T):
            raise ParameterError("channel matrix must be exactly symmetric")
        if np.any(alpha < 0.0) or np.any(alpha > 1.0):
            raise ParameterError("channel probabilities must lie in [0, 1]")
        object.__setattr__(self, "alpha", _readonly(alpha))

    @property
    def r(self) -> int:
        return self.alpha.shape[0]


@dataclass(frozen=True)
class ModelParams:
    """Full parameter tuple for one network configuration."""

    n: int
    dist: ClassDistribution
    keys: KeyProfile
    channel: ChannelMatrix

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise ParameterError("node count must be at least 2")
        object.__setattr__(self, "n", n)
        if not (self.dist.r == self.keys.r == self.channel.r):
            raise ParameterError(
                "class count mismatch: "
                f"distribution has {self.dist.r}, key profile {self.keys.r}, "
                f"channel matrix {self.channel.r}"
            )

    @property
    def r(self) -> int:
        return self.dist.r


@dataclass(frozen=True)
class DerivedQuantities:
    """Closed-form quantities derived from one :class:`ModelParams`.

    ``p[i, j]`` is the key-sharing probability between class ``i`` and
    class ``j`` nodes, ``lam`` the key-layer mean edge probabilities, and
    ``Lam`` the mean edge probabilities of the intersected graph.  ``m`` is
    the class minimizing ``Lam`` (ties towards the smallest index), ``d``
    maximizes ``alpha[m, j]`` and ``s`` maximizes ``alpha[m, j] * p[m, j]``
    over ``j``.  ``c_n = n * Lam[m] / log(n)``.
    """

    p: np.ndarray
    lam: np.ndarray
    Lam: np.ndarray
    m: int
    d: int
    s: int
    c_n: float


class Prediction(enum.Enum):
    """Asymptotic verdict on the absence of isolated nodes."""

    ZERO_LAW = "zero-law"
    ONE_LAW = "one-law"
    CRITICAL = "critical"


def pairwise_key_prob(ki: int, kj: int, pool: int) -> float:
    """Probability that a ring of ``ki`` keys intersects a ring of ``kj`` keys.

    Both rings are drawn uniformly without replacement from a pool of
    ``pool`` keys.  Evaluated as the complement of the no-overlap product
    ``prod_{l=0}^{kj-1} (pool - ki - l) / (pool - l)``; the complement is
    accumulated alongside the product (never as ``1 - product``) so the
    relative error stays near machine epsilon even when the probability is
    tiny.  Returns exactly 1.0 when ``ki + kj > pool``.
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
        return 1.0
    hit = 0.0  # running value of 1 - miss
    miss = 1.0  # running no-overlap product
    for ell in range(kj):
        x = ki / (pool - ell)
        hit += miss * x
        miss *= 1.0 - x
    return hit


def derive(params: ModelParams) -> DerivedQuantities:
    """Compute all derived quantities for ``params``."""
    r = params.r
    mu = params.dist.probs
    sizes = params.keys.ring_sizes
    pool = params.keys.pool_size
    alpha = params.channel.alpha

    p = np.empty((r, r), dtype=float)
    for i in range(r):
        for j in range(i, r):
            p[i, j] = p[j, i] = pairwise_key_prob(int(sizes[i]), int(sizes[j]), pool)

    lam = p @ mu
    Lam = (alpha * p) @ mu
    m = int(np.argmin(Lam))
    d = int(np.argmax(alpha[m]))
    s = int(np.argmax(alpha[m] * p[m]))
    c_n = float(params.n * Lam[m] / math.log(params.n))
    return DerivedQuantities(
        p=_readonly(p), lam=_readonly(lam), Lam=_readonly(Lam), m=m, d=d, s=s, c_n=c_n
    )


def expected_isolated(params: ModelParams) -> float:
    """First moment of the isolated-node count: ``n * sum_i mu_i (1 - Lam_i)^(n-1)``."""
    dq = derive(params)
    mu = params.dist.probs
    return float(params.n * np.sum(mu * (1.0 - dq.Lam) ** (params.n - 1)))


def expected_class_m_isolated(params: ModelParams) -> float:
    """First moment of the count of isolated nodes in the minimizing class."""
    dq = derive(params)
    mu_m = float(params.dist.probs[dq.m])
    return float(params.n * mu_m * (1.0 - dq.Lam[dq.m]) ** (params.n - 1))


def linked_key_profile(
    offsets: Iterable[int], pool_size: int
) -> Callable[[int], KeyProfile]:
    """Family of key profiles ``K_i = K_1 + offsets[i]`` indexed by ``K_1``.

    ``offsets`` must start at 0 and be non-decreasing so the produced
    profiles keep their ordering invariant.
    """
    offs = tuple(int(o) for o in offsets)
    if not offs or offs[0] != 0:
        raise ParameterError("offsets must start at 0 for the smallest ring")
    if any(b < a for a, b in zip(offs, offs[1:])):
        raise ParameterError("offsets must be non-decreasing")

    def family(k1: int) -> KeyProfile:
        return KeyProfile(
            ring_sizes=np.array([k1 + o for o in offs], dtype=np.int64),
            pool_size=pool_size,
        )

    return family


def critical_threshold(
    n: int,
    dist: ClassDistribution,
    channel: ChannelMatrix,
    pool_size: int,
    profile_family: Callable[[int], KeyProfile],
    search_range: Iterable[int],
) -> Optional[int]:
    """Smallest ``K_1`` in ``search_range`` with ``Lam_m(n) > log(n) / n``.

    ``profile_family`` maps a candidate smallest ring size to a full
    :class:`KeyProfile` (for instance the linked rule ``K_2 = K_1 + 5``).
    Returns ``None`` when no candidate satisfies the inequality.
    """
    bound = math.log(n) / n
    for k1 in sorted(set(int(k) for k in search_range)):
        params = ModelParams(
            n=n, dist=dist, keys=profile_family(k1), channel=channel
        )
        dq = derive(params)
        if dq.Lam[dq.m] > bound:
            return k1
    return None


def theorem_prediction(c_n_limit: float) -> Prediction:
    """Predicted law for the absence of isolated nodes from the scaling limit.

    Above 1 the graph has no isolated node with high probability, below 1 it
    has one; exactly at 1 (within 1e-9) the asymptotic theory is silent and
    ``CRITICAL`` is reported.  Side conditions on the channel scaling are the
    caller's responsibility; the CLI prints them as diagnostics.
    """
    c = float(c_n_limit)
    if not c > 0.0:
        raise ParameterError("scaling constant must be strictly positive")
    if abs(c - 1.0) <= _CRITICAL_TOL:
        return Prediction.CRITICAL
    return Prediction.ONE_LAW if c > 1.0 else Prediction.ZERO_LAW
