"""On-demand path discovery over the key-sharing graphs.

Inside a cluster a message is forwarded greedily to the key-neighbor closest
to the destination. Between clusters it climbs to the source's
sub-controller, crosses the controller key graph along a precomputed
shortest path, and descends into the destination cluster.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Union

import numpy as np

from .cluster import Clustering
from .deploy import Deployment
from .errors import (ConfigError, ControllerDisconnected, DeadEnd, GreedyTailFailure,
                     LoopGuard)
from .keys import ControllerKeyGraph, KeyShareGraph

ENTRY_POLICIES = ("direct", "greedy")


class Controller(NamedTuple):
    """Sub-controller of cluster ``index``; distinct from every sensor node."""

    index: int

    def __repr__(self) -> str:
        return f"ctrl{self.index}"


Hop = Union[int, Controller]


@dataclass(frozen=True)
class RoutePath:
    hops: tuple[Hop, ...]
    kind: str
    from_cache: bool = False

    @property
    def hop_count(self) -> int:
        return len(self.hops) - 1


class ControllerRouteTable:
    """All-pairs unit-weight shortest paths between sub-controllers."""

    def __init__(self, size: int, paths: dict[tuple[int, int], list[int]]):
        self.size = size
        self._paths = paths

    def path(self, a: int, b: int) -> list[int] | None:
        return self._paths.get((a, b))

    def distance(self, a: int, b: int) -> int | None:
        p = self._paths.get((a, b))
        return None if p is None else len(p) - 1

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self._paths


def _dijkstra(adjacency: list[list[int]], source: int) -> list[float]:
    dist = [float("inf")] * len(adjacency)
    dist[source] = 0
    visited = [False] * len(adjacency)
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if visited[u]:
            continue
        visited[u] = True
        for v in adjacency[u]:
            if not visited[v] and d + 1 < dist[v]:
                dist[v] = d + 1
                heapq.heappush(heap, (d + 1, v))
    return dist


def controller_paths(graph: ControllerKeyGraph | list[list[int]]) -> ControllerRouteTable:
    """Shortest controller paths with unit link weights.

    Among equally short paths the one whose next hop has the lowest
    controller id is kept, at every step. Disconnected pairs are absent.
    """
    adjacency = graph.adjacency() if isinstance(graph, ControllerKeyGraph) else [
        sorted(nbrs) for nbrs in graph]
    n = len(adjacency)
    # dist_to[t][v]: hops from v to t (graph is undirected)
    dist_to = [_dijkstra(adjacency, t) for t in range(n)]
    paths: dict[tuple[int, int], list[int]] = {}
    for a in range(n):
        for b in range(n):
            if dist_to[b][a] == float("inf"):
                continue
            path = [a]
            cur = a
            while cur != b:
                want = dist_to[b][cur] - 1
                cur = next(v for v in adjacency[cur] if dist_to[b][v] == want)
                path.append(cur)
            paths[(a, b)] = path
    return ControllerRouteTable(n, paths)


def greedy_route(src: int, dst: int, adjacency: list[np.ndarray], positions: np.ndarray,
                 max_hops: int | None = None) -> RoutePath:
    """Forward hop by hop to the unvisited key-neighbor nearest ``dst``.

    Raises :class:`DeadEnd` when every key-neighbor has been visited and
    :class:`LoopGuard` if the path grows beyond ``max_hops``.
    """
    if src == dst:
        raise ConfigError("source and destination must differ")
    diff = positions - positions[dst]
    dist2 = np.einsum("ij,ij->i", diff, diff)
    dist2[dst] = -1.0  # beats any node colocated with dst
    if max_hops is None:
        max_hops = len(positions)
    hops = [src]
    visited = np.zeros(len(positions), dtype=bool)
    visited[src] = True
    cur = src
    while cur != dst:
        if len(hops) - 1 >= max_hops:
            raise LoopGuard(f"path from {src} to {dst} exceeded {max_hops} hops", hops)
        nbrs = adjacency[cur]
        if len(nbrs) == 0:
            raise DeadEnd(f"node {cur} shares no keys", hops)
        d2 = dist2[nbrs]
        d2[visited[nbrs]] = np.inf
        # a shared key with dst always wins (direct broadcast); otherwise the
        # first minimum is the lowest id since nbrs are sorted
        j = int(d2.argmin())
        if d2[j] == np.inf:
            raise DeadEnd(f"no unvisited key-neighbor at node {cur}", hops)
        cur = int(nbrs[j])
        visited[cur] = True
        hops.append(cur)
    return RoutePath(hops=tuple(hops), kind="intra")


@dataclass
class Network:
    """Everything routing needs for one deployment at one sharing probability."""

    deployment: Deployment
    clustering: Clustering
    node_keys: KeyShareGraph
    controller_keys: ControllerKeyGraph
    route_table: ControllerRouteTable = field(init=False)

    def __post_init__(self):
        self.route_table = controller_paths(self.controller_keys)
        self._sizes = self.clustering.sizes()

    @property
    def positions(self) -> np.ndarray:
        return self.deployment.positions

    def cluster_of(self, node: int) -> int:
        return int(self.clustering.assignment[node])

    def cluster_size(self, cluster: int) -> int:
        return int(self._sizes[cluster])


def _entry_node(network: Network, dst: int) -> int | None:
    cluster = network.cluster_of(dst)
    members = network.clustering.members(cluster)
    members = members[members != dst]
    if len(members) == 0:
        return None
    d2 = np.sum((network.positions[members] - network.positions[dst]) ** 2, axis=1)
    return int(members[int(np.argmin(d2))])


def inter_cluster_route(src: int, dst: int, network: Network,
                        mode: str = "direct") -> RoutePath:
    if mode not in ENTRY_POLICIES:
        raise ConfigError(f"entry policy must be one of {ENTRY_POLICIES}, got {mode!r}")
    ca, cb = network.cluster_of(src), network.cluster_of(dst)
    if ca == cb:
        raise ConfigError(f"nodes {src} and {dst} are both in cluster {ca}")
    ctrl = network.route_table.path(ca, cb)
    if ctrl is None:
        raise ControllerDisconnected(
            f"no controller key path from cluster {ca} to cluster {cb}",
            [src, Controller(ca)])
    hops: list[Hop] = [src, *(Controller(c) for c in ctrl)]

    entry = _entry_node(network, dst) if mode == "greedy" else None
    if entry is None:
        hops.append(dst)
    else:
        try:
            tail = greedy_route(entry, dst, network.node_keys.adjacency, network.positions,
                                max_hops=network.cluster_size(cb))
        except (DeadEnd, LoopGuard) as exc:
            raise GreedyTailFailure(
                f"greedy tail from entry node {entry} to {dst} failed: {exc}",
                hops + exc.partial) from exc
        hops.extend(tail.hops)
    return RoutePath(hops=tuple(hops), kind="inter")


class PathCache:
    """Paths already discovered, keyed by ordered (source, destination)."""

    def __init__(self):
        self._paths: dict[tuple[int, int], RoutePath] = {}
        self._lock = threading.Lock()

    def get(self, src: int, dst: int) -> RoutePath | None:
        with self._lock:
            return self._paths.get((src, dst))

    def put(self, src: int, dst: int, path: RoutePath) -> RoutePath:
        with self._lock:
            # first writer wins so concurrent misses agree on one path
            return self._paths.setdefault((src, dst), path)

    def __len__(self) -> int:
        return len(self._paths)


def route(src: int, dst: int, network: Network, cache: PathCache,
          mode: str = "direct") -> RoutePath:
    if src == dst:
        raise ConfigError("source and destination must differ")
    cached = cache.get(src, dst)
    if cached is not None:
        return replace(cached, from_cache=True)
    if network.cluster_of(src) == network.cluster_of(dst):
        found = greedy_route(src, dst, network.node_keys.adjacency, network.positions,
                             max_hops=network.cluster_size(network.cluster_of(src)))
    else:
        found = inter_cluster_route(src, dst, network, mode)
    return cache.put(src, dst, found)


def path_violations(path: RoutePath, network: Network) -> list[str]:
    """Hops in ``path`` that no key edge or own-controller link licenses."""
    problems = []
    for a, b in zip(path.hops, path.hops[1:]):
        a_ctrl, b_ctrl = isinstance(a, Controller), isinstance(b, Controller)
        if a_ctrl and b_ctrl:
            if not network.controller_keys.shares_key(a.index, b.index):
                problems.append(f"{a!r}-{b!r}: controllers share no key")
        elif a_ctrl or b_ctrl:
            ctrl, node = (a, b) if a_ctrl else (b, a)
            if network.cluster_of(node) != ctrl.index:
                problems.append(f"{a!r}-{b!r}: node is outside the controller's cluster")
        elif network.cluster_of(a) != network.cluster_of(b):
            problems.append(f"{a}-{b}: nodes are in different clusters")
        elif not network.node_keys.shares_key(a, b):
            problems.append(f"{a}-{b}: nodes share no key")
    nodes = [h for h in path.hops if not isinstance(h, Controller)]
    if len(path.hops) < 2:
        problems.append("path has no hops")
    if path.kind == "intra" and len(set(nodes)) != len(nodes):
        problems.append("intra path revisits a node")
    return problems
