import numpy as np
import pytest

from clusterkeys.deploy import make_rng
from clusterkeys.sim import SimConfig, build_network, build_world


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture(scope="session")
def small_network():
    """600 nodes, 3 clusters, moderate sharing probability."""
    config = SimConfig(m=600, k=3, probabilities=(0.3,), trials=1, queries_per_trial=100)
    deployment, clustering = build_world(config, 0)
    return build_network(config, 0, 0, deployment, clustering)


def brute_force_partition(points: np.ndarray, k: int) -> float:
    """Smallest within-cluster sum of squares over every k-partition.

    Enumerates all k**n labelings; each cluster's scatter is
    sum|x|^2 - |sum x|^2 / count, which equals the scatter about its centroid.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    codes = np.arange(k ** n)
    labels = (codes[:, None] // k ** np.arange(n)[None, :]) % k  # (k**n, n)
    total = float((points ** 2).sum())
    best = np.full(len(codes), total)
    full = np.ones(len(codes), dtype=bool)
    for c in range(k):
        mask = labels == c
        count = mask.sum(axis=1)
        full &= count > 0
        sums = mask.astype(float) @ points
        with np.errstate(divide="ignore", invalid="ignore"):
            best -= np.where(count > 0, (sums ** 2).sum(axis=1) / count, 0.0)
    return float(best[full].min())


def make_network(positions, assignment, node_edges, ctrl_edges, means=None):
    """Hand-built network for routing tests."""
    from clusterkeys.cluster import Clustering
    from clusterkeys.deploy import Deployment
    from clusterkeys.keys import ControllerKeyGraph, KeyShareGraph, _edges_to_adjacency
    from clusterkeys.route import Network

    positions = np.asarray(positions, dtype=float)
    assignment = np.asarray(assignment)
    k = int(assignment.max()) + 1
    if means is None:
        means = np.array([positions[assignment == c].mean(axis=0) for c in range(k)])
    edges = np.array(sorted({(min(a, b), max(a, b)) for a, b in node_edges}),
                     dtype=np.int64).reshape(-1, 2)
    per_cluster = {c: edges[assignment[edges[:, 0]] == c] for c in range(k)}
    node_keys = KeyShareGraph(edges=per_cluster, nominal_s={c: 0 for c in range(k)},
                              adjacency=_edges_to_adjacency(edges, len(positions)))
    ctrl = ControllerKeyGraph(edges={(min(a, b), max(a, b)) for a, b in ctrl_edges},
                              range_d=float("inf"), l_per_controller=[0] * k,
                              nominal_ss=[0] * k)
    clustering = Clustering(k=k, assignment=assignment, means=np.asarray(means, float),
                            objective=0.0, iterations=0)
    deployment = Deployment(positions=positions, area_side=1e9, rng_seed=0)
    return Network(deployment, clustering, node_keys, ctrl)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
