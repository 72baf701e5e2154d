"""Simulator and analysis library for secure connectivity of heterogeneous
key-predistribution sensor networks under a heterogeneous on/off channel
model."""

from .analysis import TrialOutcome, analyze, class_edge_audit, connectivity, count_isolated
from .errors import ConfigError, KeynetsimError, ParameterError
from .graphgen import (
    IntersectionGraph,
    KeyRing,
    generate,
    generate_layers,
    key_adjacency,
    rng_stream,
    sample_classes,
    sample_key_ring,
    sample_rings_batch,
)
from .model import (
    ChannelMatrix,
    ClassDistribution,
    DerivedQuantities,
    KeyProfile,
    ModelParams,
    Prediction,
    critical_threshold,
    derive,
    expected_class_m_isolated,
    expected_isolated,
    linked_key_profile,
    pairwise_key_prob,
    theorem_prediction,
)
from .montecarlo import (
    AlphaDiagonalSweep,
    AlphaEntrySweep,
    ExperimentSpec,
    ExplicitSweep,
    KeyRingSweep,
    RunStats,
    SweepResult,
    run_sweep,
    run_trials,
    sweep_threshold,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaDiagonalSweep",
    "AlphaEntrySweep",
    "ChannelMatrix",
    "ClassDistribution",
    "ConfigError",
    "DerivedQuantities",
    "ExperimentSpec",
    "ExplicitSweep",
    "IntersectionGraph",
    "KeyProfile",
    "KeyRing",
    "KeyRingSweep",
    "KeynetsimError",
    "ModelParams",
    "ParameterError",
    "Prediction",
    "RunStats",
    "SweepResult",
    "TrialOutcome",
    "analyze",
    "class_edge_audit",
    "connectivity",
    "count_isolated",
    "critical_threshold",
    "derive",
    "expected_class_m_isolated",
    "expected_isolated",
    "generate",
    "generate_layers",
    "key_adjacency",
    "linked_key_profile",
    "pairwise_key_prob",
    "rng_stream",
    "run_sweep",
    "run_trials",
    "sample_classes",
    "sample_key_ring",
    "sample_rings_batch",
    "sweep_threshold",
    "theorem_prediction",
    "wilson_interval",
    "__version__",
]
