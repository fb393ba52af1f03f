"""Random node deployments and planar geometry."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError


class Position(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Deployment:
    """Node coordinates for one simulated network.

    ``positions`` is an ``(m, 2)`` float array; row ``i`` is node ``i``.
    """

    positions: np.ndarray
    area_side: float
    rng_seed: int

    @property
    def m(self) -> int:
        return len(self.positions)

    @property
    def node_ids(self) -> range:
        return range(self.m)

    def position(self, node_id: int) -> Position:
        x, y = self.positions[node_id]
        return Position(float(x), float(y))

    @property
    def nodes(self) -> list[tuple[int, Position]]:
        return [(i, self.position(i)) for i in self.node_ids]


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """PCG64 generator; the same seed gives the same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


def generate_deployment(m: int, area_side: float, seed: int) -> Deployment:
    """Place ``m`` nodes independently and uniformly over ``[0, area_side]^2``."""
    if int(m) != m or m < 1:
        raise ConfigError(f"node count must be a positive integer, got {m!r}")
    if not (area_side > 0 and math.isfinite(area_side)):
        raise ConfigError(f"area side must be positive and finite, got {area_side!r}")
    rng = make_rng(seed)
    positions = rng.uniform(0.0, area_side, size=(int(m), 2))
    positions.setflags(write=False)
    return Deployment(positions=positions, area_side=float(area_side), rng_seed=int(seed))


def distance(a, b) -> float:
    """Euclidean distance between two points given as ``(x, y)`` pairs."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def write_deployment_csv(deployment: Deployment, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "x", "y"])
        for i, (x, y) in enumerate(deployment.positions):
            # repr() round-trips doubles exactly (17 significant digits max)
            writer.writerow([i, repr(float(x)), repr(float(y))])


def read_deployment_csv(path: str | Path, area_side: float, rng_seed: int = 0) -> Deployment:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["node_id", "x", "y"]:
            raise ConfigError(f"{path}: expected header node_id,x,y, got {reader.fieldnames}")
        rows = [(int(r["node_id"]), float(r["x"]), float(r["y"])) for r in reader]
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ConfigError(f"{path}: node ids must be dense 0..m-1")
    positions = np.array([[x, y] for _, x, y in rows], dtype=float).reshape(-1, 2)
    if len(positions) and (positions.min() < 0 or positions.max() > area_side):
        raise ConfigError(f"{path}: coordinates fall outside [0, {area_side}]")
    positions.setflags(write=False)
    return Deployment(positions=positions, area_side=float(area_side), rng_seed=int(rng_seed))
