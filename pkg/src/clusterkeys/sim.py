"""End-to-end experiments: deploy, cluster, distribute keys, route a workload."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .cluster import Clustering, kmeanspp
from .deploy import Deployment, generate_deployment, make_rng
from .errors import ConfigError, RouteFailure
from .keys import (build_key_share_graph, controller_range_graph,
                   distribute_controller_keys, key_set_size, pool_size)
from .route import ENTRY_POLICIES, Network, PathCache, route

DEFAULT_PROBABILITIES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
                         0.99, 0.9999, 1 - 1e-9)

CSV_HEADER = ("prob,clusters,nodes,s_nominal,mean_degree,avg_hops,intra_hops,"
              "inter_hops,delivery_rate,pool_cluster,pool_network,trials,seed")

TRACE_HEADER = "trial,prob,src,dst,kind,hops,from_cache,outcome"

# spawn-key slots for child seeds within a trial
_DEPLOY, _CLUSTER, _QUERIES, _NODE_KEYS, _CTRL_KEYS = range(5)


@dataclass
class SimConfig:
    m: int = 4000
    k: int = 4
    area_side: float = 1000.0
    probabilities: tuple[float, ...] = DEFAULT_PROBABILITIES
    controller_range: float | None = None  # None -> area diagonal
    queries_per_trial: int = 10000
    trials: int = 10
    seed: int = 42
    entry_policy: str = "direct"

    def __post_init__(self):
        self.probabilities = tuple(float(p) for p in self.probabilities)
        self.validate()

    def validate(self) -> None:
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"nodes must be a positive integer, got {self.m!r}")
        if int(self.k) != self.k or not 1 <= self.k <= self.m:
            raise ConfigError(f"clusters must be in 1..{self.m}, got {self.k!r}")
        if not (self.area_side > 0 and math.isfinite(self.area_side)):
            raise ConfigError(f"area must be positive, got {self.area_side!r}")
        if not self.probabilities:
            raise ConfigError("at least one probability is required")
        for p in self.probabilities:
            if not 0.0 < p < 1.0:
                raise ConfigError(f"probabilities must lie strictly inside (0, 1), got {p}")
        if self.controller_range is not None and not self.controller_range > 0:
            raise ConfigError(f"range must be positive, got {self.controller_range!r}")
        if self.queries_per_trial < 1:
            raise ConfigError(f"queries must be positive, got {self.queries_per_trial}")
        if self.trials < 1:
            raise ConfigError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.entry_policy not in ENTRY_POLICIES:
            raise ConfigError(f"entry policy must be one of {ENTRY_POLICIES}, "
                              f"got {self.entry_policy!r}")

    @property
    def range_d(self) -> float:
        if self.controller_range is None:
            return self.area_side * math.sqrt(2.0)
        return self.controller_range


def child_seed(seed: int, *key: int) -> int:
    """64-bit seed for the stream identified by ``key`` under ``seed``.

    Depends only on (seed, key), never on the order streams are requested.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


class QueryOutcome(NamedTuple):
    src: int
    dst: int
    kind: str
    hops: int
    from_cache: bool
    outcome: str

    @property
    def delivered(self) -> bool:
        return self.outcome == "ok"


@dataclass
class ProbabilityResult:
    probability: float
    nominal_s: dict[int, int]
    mean_degree: float
    outcomes: list[QueryOutcome]


@dataclass
class TrialResult:
    trial_index: int
    seed: int
    cluster_sizes: list[int]
    per_probability: list[ProbabilityResult] = field(default_factory=list)


def build_world(config: SimConfig, trial_index: int) -> tuple[Deployment, Clustering]:
    deployment = generate_deployment(config.m, config.area_side,
                                     child_seed(config.seed, trial_index, _DEPLOY))
    clustering = kmeanspp(deployment.positions, config.k,
                          make_rng(child_seed(config.seed, trial_index, _CLUSTER)))
    return deployment, clustering


def build_network(config: SimConfig, trial_index: int, prob_index: int,
                  deployment: Deployment, clustering: Clustering) -> Network:
    p = config.probabilities[prob_index]
    node_rngs = [make_rng(child_seed(config.seed, trial_index, _NODE_KEYS, prob_index, c))
                 for c in range(config.k)]
    node_keys = build_key_share_graph(clustering.assignment, config.k, p, node_rngs)
    candidates = controller_range_graph(clustering.means, config.range_d)
    ctrl_keys = distribute_controller_keys(
        candidates, p, make_rng(child_seed(config.seed, trial_index, _CTRL_KEYS, prob_index)),
        range_d=config.range_d)
    return Network(deployment, clustering, node_keys, ctrl_keys)


def draw_queries(m: int, count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform ordered pairs of distinct nodes."""
    if m < 2:
        return []
    src = rng.integers(m, size=count)
    dst = rng.integers(m - 1, size=count)
    dst = dst + (dst >= src)
    return list(zip(src.tolist(), dst.tolist()))


def run_queries(network: Network, queries: Iterable[tuple[int, int]],
                mode: str) -> list[QueryOutcome]:
    cache = PathCache()
    outcomes = []
    for src, dst in queries:
        kind = "intra" if network.cluster_of(src) == network.cluster_of(dst) else "inter"
        try:
            path = route(src, dst, network, cache, mode)
        except RouteFailure as exc:
            outcomes.append(QueryOutcome(src, dst, kind, max(len(exc.partial) - 1, 0),
                                         False, exc.reason))
        else:
            outcomes.append(QueryOutcome(src, dst, path.kind, path.hop_count,
                                         path.from_cache, "ok"))
    return outcomes


def run_trial(config: SimConfig, trial_index: int) -> TrialResult:
    """One deployment and clustering, routed at every probability in the sweep.

    The query workload is drawn once per trial and replayed at each
    probability, so the sharing probability is the only thing that varies.
    """
    deployment, clustering = build_world(config, trial_index)
    queries = draw_queries(config.m, config.queries_per_trial,
                           make_rng(child_seed(config.seed, trial_index, _QUERIES)))
    result = TrialResult(trial_index=trial_index,
                         seed=child_seed(config.seed, trial_index),
                         cluster_sizes=clustering.sizes().tolist())
    for j, p in enumerate(config.probabilities):
        network = build_network(config, trial_index, j, deployment, clustering)
        outcomes = run_queries(network, queries, config.entry_policy)
        result.per_probability.append(ProbabilityResult(
            probability=p,
            nominal_s=dict(network.node_keys.nominal_s),
            mean_degree=float(network.node_keys.realized_degree.mean()),
            outcomes=outcomes,
        ))
    return result


@dataclass
class MetricsRecord:
    probability: float
    clusters: int
    nodes: int
    s_nominal: int
    mean_realized_degree: float
    avg_hops: float
    intra_avg_hops: float
    inter_avg_hops: float
    delivery_rate: float
    pool_keys_cluster: int
    pool_keys_network: int
    trials: int
    seed: int
    # bookkeeping, not written to the CSV
    queries: int = 0
    delivered: int = 0
    intra_queries: int = 0
    inter_queries: int = 0


def nominal_cluster_size(m: int, k: int) -> int:
    return m // k


def _mean(total: float, count: int) -> float:
    return total / count if count else math.nan


def aggregate(trials: Sequence[TrialResult], config: SimConfig) -> list[MetricsRecord]:
    """Pool trials per probability; hop averages cover delivered queries only."""
    if not trials:
        raise ConfigError("aggregate needs at least one trial")
    trials = sorted(trials, key=lambda t: t.trial_index)
    n_nominal = nominal_cluster_size(config.m, config.k)
    records = []
    for j, p in enumerate(config.probabilities):
        hops = {"intra": 0, "inter": 0}
        ok = {"intra": 0, "inter": 0}
        asked = {"intra": 0, "inter": 0}
        degrees = []
        for trial in trials:
            res = trial.per_probability[j]
            degrees.append(res.mean_degree)
            for q in res.outcomes:
                asked[q.kind] += 1
                if q.delivered:
                    ok[q.kind] += 1
                    hops[q.kind] += q.hops
        total_q = asked["intra"] + asked["inter"]
        total_ok = ok["intra"] + ok["inter"]
        records.append(MetricsRecord(
            probability=p,
            clusters=config.k,
            nodes=config.m,
            s_nominal=key_set_size(n_nominal, p) if n_nominal >= 2 else 0,
            mean_realized_degree=float(np.mean(degrees)),
            avg_hops=_mean(hops["intra"] + hops["inter"], total_ok),
            intra_avg_hops=_mean(hops["intra"], ok["intra"]),
            inter_avg_hops=_mean(hops["inter"], ok["inter"]),
            delivery_rate=_mean(total_ok, total_q),
            pool_keys_cluster=pool_size(n_nominal),
            pool_keys_network=pool_size(config.m),
            trials=len(trials),
            seed=config.seed,
            queries=total_q,
            delivered=total_ok,
            intra_queries=asked["intra"],
            inter_queries=asked["inter"],
        ))
    return records


def run_experiment(config: SimConfig) -> tuple[list[MetricsRecord], list[TrialResult]]:
    trials = [run_trial(config, t) for t in range(config.trials)]
    return aggregate(trials, config), trials


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_row(record: MetricsRecord) -> list[str]:
    names = [f.name for f in fields(MetricsRecord)][:13]
    return [_fmt(getattr(record, name)) for name in names]


def write_csv(records: Iterable[MetricsRecord], destination: str | Path) -> None:
    try:
        with open(destination, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            for record in records:
                writer.writerow(_csv_row(record))
    except OSError as exc:
        raise OSError(f"cannot write CSV to {destination}: {exc.strerror or exc}") from exc


def write_trace(trials: Sequence[TrialResult], destination: str | Path) -> None:
    try:
        with open(destination, "w", newline="") as fh:
            fh.write(TRACE_HEADER + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            for trial in sorted(trials, key=lambda t: t.trial_index):
                for res in trial.per_probability:
                    for q in res.outcomes:
                        writer.writerow([trial.trial_index, repr(res.probability), q.src,
                                         q.dst, q.kind, q.hops, int(q.from_cache),
                                         q.outcome])
    except OSError as exc:
        raise OSError(f"cannot write trace to {destination}: {exc.strerror or exc}") from exc
