import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from keynetsim import ChannelMatrix, ClassDistribution, KeyProfile, ModelParams
from keynetsim.graphgen import _build_graph

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def make_params(n, mu, sizes, pool, alpha) -> ModelParams:
    return ModelParams(
        n=n,
        dist=ClassDistribution(probs=np.asarray(mu, dtype=float)),
        keys=KeyProfile(ring_sizes=np.asarray(sizes, dtype=np.int64), pool_size=pool),
        channel=ChannelMatrix(alpha=np.asarray(alpha, dtype=float)),
    )


def figure1_params(n=500, k1=10, alpha12=0.2) -> ModelParams:
    return make_params(
        n,
        [0.5, 0.5],
        [k1, k1 + 5],
        10**4,
        [[0.3, alpha12], [alpha12, 0.3]],
    )


def graph_from_edges(n, edges, classes=None, r=1):
    """Hand-built graph for structural tests."""
    classes = (
        np.zeros(n, dtype=np.int32)
        if classes is None
        else np.asarray(classes, dtype=np.int32)
    )
    if edges:
        u = np.array([min(e) for e in edges], dtype=np.int64)
        v = np.array([max(e) for e in edges], dtype=np.int64)
        order = np.lexsort((v, u))
        u, v = u[order], v[order]
    else:
        u = v = np.empty(0, dtype=np.int64)
    return _build_graph(n, r, classes, u, v)


@pytest.fixture
def rng():
    return np.random.default_rng(20201107)
