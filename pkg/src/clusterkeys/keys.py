"""Birthday-problem key sizing and pairwise key-sharing graphs.

Keys are opaque identifiers: a key is nothing more than the unordered pair
of endpoints that share it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ConfigError

CONTROLLER_SCOPE = "ctrl"


class KeyId(NamedTuple):
    scope: int | str
    a: int
    b: int


def key_id(a: int, b: int, scope: int | str) -> KeyId:
    if a == b:
        raise ValueError("a node cannot share a pairwise key with itself")
    return KeyId(scope, min(a, b), max(a, b))


def pool_size(n: int) -> int:
    """Number of distinct pairwise keys among ``n`` parties."""
    if n < 0:
        raise ConfigError(f"population must be non-negative, got {n}")
    return n * (n - 1) // 2


def birthday_probability(n: int, s: int) -> float:
    """Approximate chance of a collision when ``s`` draws land on ``n`` slots."""
    if n < 2:
        raise ConfigError(f"birthday approximation needs n >= 2, got {n}")
    if s < 0:
        raise ConfigError(f"shares count must be non-negative, got {s}")
    pairs = s * (s - 1) // 2
    # expm1/log1p keep precision when the result is tiny
    return -math.expm1(pairs * math.log1p(-1.0 / n))


def exact_birthday_probability(d: int, n: int) -> float:
    """Exact collision probability for ``n`` people over ``d`` days.

    Pigeonhole: returns 1 when ``n > d``.
    """
    if d < 1 or n < 0:
        raise ConfigError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    if n > d:
        return 1.0
    log_none = math.fsum(math.log1p(-i / d) for i in range(1, n))
    return -math.expm1(log_none)


def key_set_size(n: int, p: float) -> int:
    """Shares per node so that the approximate collision chance reaches ``p``.

    Solves ``p = 1 - (1 - 1/n)^(s(s-1)/2)`` for real ``s`` and floors it,
    then clamps to ``[0, n-1]``.
    """
    if n < 2:
        raise ConfigError(f"key set sizing needs n >= 2, got {n}")
    if not 0.0 < p < 1.0:
        raise ConfigError(f"probability must lie strictly inside (0, 1), got {p}")
    pairs = math.log1p(-p) / math.log1p(-1.0 / n)
    s = math.floor((1.0 + math.sqrt(1.0 + 8.0 * pairs)) / 2.0)
    return max(0, min(s, n - 1))


def _edges_to_adjacency(edges: np.ndarray, size: int) -> list[np.ndarray]:
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    bounds = np.searchsorted(src, np.arange(size + 1))
    return [dst[bounds[i]:bounds[i + 1]] for i in range(size)]


def _canonical_edges(pairs: np.ndarray, size: int) -> np.ndarray:
    if len(pairs) == 0:
        return np.empty((0, 2), dtype=np.int64)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    codes = np.unique(lo * size + hi)
    return np.column_stack([codes // size, codes % size]).astype(np.int64)


def distribute_node_keys(members, s: int, rng: np.random.Generator) -> np.ndarray:
    """Key edges for one cluster.

    Each member, in id order, picks ``s`` distinct partners uniformly from
    the rest of its cluster. Returns the deduplicated undirected edges as an
    ``(E, 2)`` array of node ids with the smaller id first.
    """
    members = np.sort(np.asarray(members, dtype=np.int64))
    n = len(members)
    if s < 0 or (n > 0 and s > n - 1):
        raise ConfigError(f"cannot draw {s} partners in a cluster of {n} nodes")
    if s == 0 or n < 2:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.empty((n * s, 2), dtype=np.int64)
    for i in range(n):
        picks = rng.choice(n - 1, size=s, replace=False)
        picks[picks >= i] += 1  # skip self
        pairs[i * s:(i + 1) * s, 0] = i
        pairs[i * s:(i + 1) * s, 1] = picks
    local = _canonical_edges(pairs, n)
    return members[local]


@dataclass
class KeyShareGraph:
    """Pairwise keys among nodes; edges never leave a cluster."""

    edges: dict[int, np.ndarray]
    nominal_s: dict[int, int]
    adjacency: list[np.ndarray]

    @property
    def realized_degree(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.adjacency], dtype=np.int64)

    def shares_key(self, a: int, b: int) -> bool:
        nbrs = self.adjacency[a]
        i = np.searchsorted(nbrs, b)
        return bool(i < len(nbrs) and nbrs[i] == b)

    def key_ids(self) -> Iterable[KeyId]:
        for cluster in sorted(self.edges):
            for a, b in self.edges[cluster]:
                yield KeyId(cluster, int(a), int(b))


def build_key_share_graph(assignment, k: int, p: float,
                          rngs: list[np.random.Generator]) -> KeyShareGraph:
    """Distribute node keys in every cluster, sizing ``s`` by that cluster's size.

    ``rngs`` holds one independent stream per cluster so clusters can be
    processed in any order with the same result.
    """
    assignment = np.asarray(assignment)
    edges: dict[int, np.ndarray] = {}
    nominal: dict[int, int] = {}
    for c in range(k):
        members = np.flatnonzero(assignment == c)
        s = key_set_size(len(members), p) if len(members) >= 2 else 0
        nominal[c] = s
        edges[c] = distribute_node_keys(members, s, rngs[c])
    all_edges = (np.concatenate(list(edges.values())) if edges
                 else np.empty((0, 2), dtype=np.int64))
    adjacency = _edges_to_adjacency(all_edges, len(assignment))
    return KeyShareGraph(edges=edges, nominal_s=nominal, adjacency=adjacency)


def controller_range_graph(positions, range_d: float) -> list[list[int]]:
    """Controllers within ``range_d`` of each other (boundary inclusive)."""
    if not range_d > 0:
        raise ConfigError(f"controller range must be positive, got {range_d}")
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    within = dist <= range_d
    np.fill_diagonal(within, False)
    return [np.flatnonzero(row).tolist() for row in within]


@dataclass
class ControllerKeyGraph:
    edges: set[tuple[int, int]]
    range_d: float
    l_per_controller: list[int]
    nominal_ss: list[int]

    @property
    def size(self) -> int:
        return len(self.l_per_controller)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.size)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(nbrs) for nbrs in adj]

    def shares_key(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def key_ids(self) -> Iterable[KeyId]:
        for a, b in sorted(self.edges):
            yield KeyId(CONTROLLER_SCOPE, a, b)


def distribute_controller_keys(candidates: list[list[int]], p: float,
                               rng: np.random.Generator,
                               range_d: float = math.inf) -> ControllerKeyGraph:
    """Each controller keys ``ss`` random peers out of the ``l`` in its range.

    With ``l <= 1`` the birthday sizing is undefined and the controller keys
    every in-range peer.
    """
    if not 0.0 < p < 1.0:
        raise ConfigError(f"probability must lie strictly inside (0, 1), got {p}")
    edges: set[tuple[int, int]] = set()
    ls: list[int] = []
    sss: list[int] = []
    for a, peers in enumerate(candidates):
        l = len(peers)
        ss = key_set_size(l, p) if l >= 2 else l
        ls.append(l)
        sss.append(ss)
        if ss == 0:
            continue
        chosen = rng.choice(np.asarray(peers), size=ss, replace=False)
        for b in chosen:
            b = int(b)
            edges.add((min(a, b), max(a, b)))
    return ControllerKeyGraph(edges=edges, range_d=range_d, l_per_controller=ls,
                              nominal_ss=sss)


def write_key_graph_csv(node_keys: KeyShareGraph, controller_keys: ControllerKeyGraph,
                        path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scope", "endpoint_a", "endpoint_b"])
        for kid in node_keys.key_ids():
            w.writerow(kid)
        for kid in controller_keys.key_ids():
            w.writerow(kid)
