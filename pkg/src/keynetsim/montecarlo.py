"""Monte Carlo trial and sweep orchestration.

Trial ``k`` of a run always draws from ``rng_stream(master_seed, offset + k)``
and sweeps partition the stream index space as ``value_index * trials + k``,
so results are bit-identical no matter how many worker processes execute the
trials.  Aggregation happens in trial-index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from statistics import NormalDist
from typing import List, Optional, Tuple, Union

import numpy as np

from .analysis import analyze
from .errors import ParameterError
from .graphgen import generate, rng_stream
from .model import (
    ChannelMatrix,
    KeyProfile,
    ModelParams,
    critical_threshold,
    derive,
    expected_class_m_isolated,
    expected_isolated,
    linked_key_profile,
)

__all__ = [
    "KeyRingSweep",
    "AlphaEntrySweep",
    "AlphaDiagonalSweep",
    "ExplicitSweep",
    "ExperimentSpec",
    "RunStats",
    "SweepResult",
    "wilson_interval",
    "run_trials",
    "run_sweep",
    "sweep_threshold",
]


def wilson_interval(
    successes: int, trials: int, confidence: float = 0.95
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    successes = int(successes)
    trials = int(trials)
    confidence = float(confidence)
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ParameterError("successes must lie in [0, trials]")
    if not 0.0 < confidence < 1.0:
        raise ParameterError("confidence must lie strictly between 0 and 1")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
        / denom
    )
    # the score interval's endpoint is exactly 0 (resp. 1) at the boundary
    # counts; pin it there rather than leaving ~1e-16 of rounding residue
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


# ---------------------------------------------------------------------------
# Sweep axes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyRingSweep:
    """Sweep the smallest ring size; other rings follow ``K_i = K_1 + offset``."""

    offsets: Tuple[int, ...]

    label = "K1"

    def params_for(self, base: ModelParams, value) -> ModelParams:
        profile = KeyProfile(
            ring_sizes=np.array([int(value) + o for o in self.offsets], dtype=np.int64),
            pool_size=base.keys.pool_size,
        )
        return replace(base, keys=profile)


@dataclass(frozen=True)
class AlphaEntrySweep:
    """Sweep one channel entry, mirrored to keep the matrix symmetric."""

    i: int
    j: int

    @property
    def label(self) -> str:
        return f"alpha_{self.i + 1}{self.j + 1}"

    def params_for(self, base: ModelParams, value) -> ModelParams:
        alpha = np.array(base.channel.alpha, copy=True)
        alpha[self.i, self.j] = alpha[self.j, self.i] = float(value)
        return replace(base, channel=ChannelMatrix(alpha=alpha))


@dataclass(frozen=True)
class AlphaDiagonalSweep:
    """Sweep all diagonal channel entries jointly."""

    label = "alpha_diag"

    def params_for(self, base: ModelParams, value) -> ModelParams:
        alpha = np.array(base.channel.alpha, copy=True)
        np.fill_diagonal(alpha, float(value))
        return replace(base, channel=ChannelMatrix(alpha=alpha))


@dataclass(frozen=True)
class ExplicitSweep:
    """Escape hatch: an explicit list of full parameter sets, one per value."""

    params_list: Tuple[ModelParams, ...]

    label = "explicit"

    def params_for(self, base: ModelParams, value) -> ModelParams:  # pragma: no cover
        raise ParameterError("explicit sweeps are materialized positionally")


SweepAxis = Union[KeyRingSweep, AlphaEntrySweep, AlphaDiagonalSweep, ExplicitSweep]


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a base configuration, a sweep axis, and the trial plan."""

    base_params: ModelParams
    axis: SweepAxis
    values: Tuple
    trials: int
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if not self.values:
            raise ParameterError("sweep must contain at least one value")
        if isinstance(self.axis, ExplicitSweep) and len(self.axis.params_list) != len(
            self.values
        ):
            raise ParameterError(
                "explicit sweep needs exactly one parameter set per value"
            )

    def materialize(self) -> List[Tuple[object, ModelParams]]:
        """Validated ``(value, params)`` pairs, one per swept value."""
        out = []
        for idx, value in enumerate(self.values):
            try:
                if isinstance(self.axis, ExplicitSweep):
                    params = self.axis.params_list[idx]
                else:
                    params = self.axis.params_for(self.base_params, value)
            except ParameterError as exc:
                raise ParameterError(
                    f"swept value {value!r} ({self.axis.label}) is invalid: {exc}"
                ) from exc
            out.append((value, params))
        return out


# ---------------------------------------------------------------------------
# Trial execution
# ---------------------------------------------------------------------------


def _trial_task(args) -> Tuple[int, Tuple[int, ...], bool]:
    params, seed, stream_index = args
    outcome = analyze(generate(params, rng_stream(seed, stream_index)))
    return (
        outcome.isolated_count,
        tuple(int(c) for c in outcome.class_isolated_counts),
        outcome.is_connected,
    )


def _map_trials(tasks, workers: int):
    if workers <= 1:
        return [_trial_task(t) for t in tasks]
    chunksize = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_task, tasks, chunksize=chunksize))


@dataclass(frozen=True)
class RunStats:
    """Per-trial outcomes of one run, in trial order, plus aggregates."""

    isolated: np.ndarray
    class_m_isolated: np.ndarray
    connected: np.ndarray

    @property
    def trials(self) -> int:
        return self.isolated.size

    @property
    def no_isolated_successes(self) -> int:
        return int(np.count_nonzero(self.isolated == 0))

    @property
    def connected_successes(self) -> int:
        return int(np.count_nonzero(self.connected))

    @property
    def p_no_isolated(self) -> float:
        return self.no_isolated_successes / self.trials

    @property
    def p_connected(self) -> float:
        return self.connected_successes / self.trials

    @property
    def mean_isolated(self) -> float:
        return float(self.isolated.mean())

    @property
    def std_isolated(self) -> float:
        """Sample standard deviation (ddof=1) of the isolated count."""
        if self.trials < 2:
            return 0.0
        return float(self.isolated.std(ddof=1))

    @property
    def mean_class_m_isolated(self) -> float:
        return float(self.class_m_isolated.mean())


def run_trials(
    params: ModelParams,
    trials: int,
    master_seed: int,
    stream_offset: int = 0,
    workers: int = 1,
) -> RunStats:
    """Run ``trials`` independent trials; trial ``k`` uses stream ``offset + k``."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    m = derive(params).m
    tasks = [(params, master_seed, stream_offset + k) for k in range(trials)]
    raw = _map_trials(tasks, workers)
    isolated = np.array([t[0] for t in raw], dtype=np.int64)
    class_m = np.array([t[1][m] for t in raw], dtype=np.int64)
    connected = np.array([t[2] for t in raw], dtype=bool)
    # A connected graph on n >= 2 nodes has no isolated node.
    assert np.all(isolated[connected] == 0)
    return RunStats(isolated=isolated, class_m_isolated=class_m, connected=connected)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    """One row of a sweep: empirical estimates next to the closed forms."""

    sweep_axis: str
    sweep_value: object
    n: int
    trials: int
    no_isolated_successes: int
    connected_successes: int
    p_no_isolated: float
    p_no_isolated_ci: Tuple[float, float]
    p_connected: float
    p_connected_ci: Tuple[float, float]
    mean_isolated: float
    std_isolated: float
    analytic_e_in: float
    mean_class_m_isolated: float
    analytic_e_yn: float
    c_n: float
    is_predicted_threshold: bool


def sweep_threshold(spec: ExperimentSpec) -> Optional[object]:
    """The swept value marked as the predicted connectivity threshold.

    For ring-size sweeps this is the minimum ``K_1`` whose configuration
    satisfies ``Lam_m(n) > log(n)/n``, evaluated through
    :func:`keynetsim.model.critical_threshold`.  For the other axes it is the
    minimum swept value satisfying the same inequality (``Lam_m`` is
    non-decreasing along every supported axis); ``None`` when no swept value
    qualifies.
    """
    if isinstance(spec.axis, KeyRingSweep):
        base = spec.base_params
        return critical_threshold(
            base.n,
            base.dist,
            base.channel,
            base.keys.pool_size,
            linked_key_profile(spec.axis.offsets, base.keys.pool_size),
            [int(v) for v in spec.values],
        )
    satisfying = []
    for value, params in spec.materialize():
        dq = derive(params)
        if dq.Lam[dq.m] > math.log(params.n) / params.n:
            satisfying.append(value)
    return min(satisfying) if satisfying else None


def run_sweep(spec: ExperimentSpec, workers: int = 1) -> List[SweepResult]:
    """Run every swept value; stream indices are ``value_index * trials + k``."""
    rows = spec.materialize()
    threshold = sweep_threshold(spec)
    trials = spec.trials

    tasks = []
    for v_idx, (_, params) in enumerate(rows):
        tasks.extend(
            (params, spec.master_seed, v_idx * trials + k) for k in range(trials)
        )
    raw = _map_trials(tasks, workers)

    results = []
    for v_idx, (value, params) in enumerate(rows):
        chunk = raw[v_idx * trials : (v_idx + 1) * trials]
        dq = derive(params)
        isolated = np.array([t[0] for t in chunk], dtype=np.int64)
        class_m = np.array([t[1][dq.m] for t in chunk], dtype=np.int64)
        connected = np.array([t[2] for t in chunk], dtype=bool)
        assert np.all(isolated[connected] == 0)
        stats = RunStats(
            isolated=isolated, class_m_isolated=class_m, connected=connected
        )
        results.append(
            SweepResult(
                sweep_axis=spec.axis.label,
                sweep_value=value,
                n=params.n,
                trials=trials,
                no_isolated_successes=stats.no_isolated_successes,
                connected_successes=stats.connected_successes,
                p_no_isolated=stats.p_no_isolated,
                p_no_isolated_ci=wilson_interval(stats.no_isolated_successes, trials),
                p_connected=stats.p_connected,
                p_connected_ci=wilson_interval(stats.connected_successes, trials),
                mean_isolated=stats.mean_isolated,
                std_isolated=stats.std_isolated,
                analytic_e_in=expected_isolated(params),
                mean_class_m_isolated=stats.mean_class_m_isolated,
                analytic_e_yn=expected_class_m_isolated(params),
                c_n=dq.c_n,
                is_predicted_threshold=(threshold is not None and value == threshold),
            )
        )
    return results
