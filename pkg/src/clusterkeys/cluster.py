"""k-means++ partitioning of a deployment into k clusters.

The final means are also where the sub-controllers sit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ClusteringError, ConfigError

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100


@dataclass
class SeedingState:
    """Centers chosen so far and each point's squared distance to the nearest one."""

    chosen: list[np.ndarray] = field(default_factory=list)
    d2: np.ndarray | None = None

    def add(self, points: np.ndarray, center: np.ndarray) -> None:
        self.chosen.append(center)
        new_d2 = np.sum((points - center) ** 2, axis=1)
        self.d2 = new_d2 if self.d2 is None else np.minimum(self.d2, new_d2)


@dataclass
class Clustering:
    k: int
    assignment: np.ndarray
    means: np.ndarray
    objective: float
    iterations: int
    # objective after each binding step, in iteration order
    history: list[float] = field(default_factory=list)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cluster)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    return arr.reshape(-1, 2)


def seed_centers(points, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick ``k`` initial centers from ``points`` with D^2 weighting.

    The first center is uniform; each later one is drawn with probability
    proportional to its squared distance from the nearest chosen center, so
    a point colocated with a center is never picked.
    """
    pts = _as_points(points)
    if k < 1:
        raise ConfigError(f"k must be at least 1, got {k}")
    if k > len(pts):
        raise ClusteringError(f"cannot seed {k} centers from {len(pts)} points")

    state = SeedingState()
    state.add(pts, pts[rng.integers(len(pts))])
    while len(state.chosen) < k:
        cum = np.cumsum(state.d2)
        total = cum[-1]
        if not total > 0:
            raise ClusteringError(
                f"only {len(state.chosen)} distinct points available for k={k}"
            )
        # side="right" skips zero-weight entries: their cumsum equals the previous one
        idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
        idx = min(idx, len(pts) - 1)
        while state.d2[idx] == 0:  # guards the u*total == total rounding edge
            idx -= 1
        state.add(pts, pts[idx])
    return np.array(state.chosen)


def assign_points(points, means) -> np.ndarray:
    """Index of the nearest mean for every point; ties go to the lowest index."""
    pts = _as_points(points)
    mus = _as_points(means)
    if len(mus) == 0:
        raise ConfigError("at least one mean is required")
    d2 = ((pts[:, None, :] - mus[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def update_means(points, assignment, k: int, previous_means=None) -> np.ndarray:
    """Centroid of each cluster.

    An empty cluster gets the point currently farthest from its own assigned
    mean (``previous_means``), which keeps all k clusters alive.
    """
    pts = _as_points(points)
    assignment = np.asarray(assignment)
    counts = np.bincount(assignment, minlength=k)
    sums = np.zeros((k, 2))
    np.add.at(sums, assignment, pts)
    means = np.empty((k, 2))
    nonempty = counts > 0
    means[nonempty] = sums[nonempty] / counts[nonempty, None]

    empty = np.flatnonzero(~nonempty)
    if len(empty):
        ref = means if previous_means is None else _as_points(previous_means)
        spread = np.sum((pts - ref[assignment]) ** 2, axis=1)
        taken: set[int] = set()
        for c in empty:
            order = np.argsort(-spread, kind="stable")
            idx = next(int(i) for i in order if int(i) not in taken)
            taken.add(idx)
            means[c] = pts[idx]
    return means


def objective(points, assignment, means) -> float:
    """Within-cluster sum of squared distances to the assigned means."""
    pts = _as_points(points)
    mus = _as_points(means)
    diff = pts - mus[np.asarray(assignment)]
    return float(np.sum(diff * diff))


def lloyd(points, init_means, max_iter: int = DEFAULT_MAX_ITER,
          tol: float = DEFAULT_TOL) -> Clustering:
    """Alternate binding and mean updates from the given starting means."""
    pts = _as_points(points)
    means = np.array(_as_points(init_means), dtype=float)
    k = len(means)
    history: list[float] = []
    iterations = 0
    while iterations < max_iter:
        assignment = assign_points(pts, means)
        history.append(objective(pts, assignment, means))
        new_means = update_means(pts, assignment, k, previous_means=means)
        shift = float(np.max(np.abs(new_means - means)))
        means = new_means
        iterations += 1
        if shift < tol:
            break
    assignment = assign_points(pts, means)
    final = objective(pts, assignment, means)
    history.append(final)
    return Clustering(k=k, assignment=assignment, means=means, objective=final,
                      iterations=iterations, history=history)


def kmeanspp(points, k: int, rng: np.random.Generator,
             max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> Clustering:
    if max_iter < 1:
        raise ConfigError(f"max_iter must be positive, got {max_iter}")
    if tol < 0:
        raise ConfigError(f"tol must be non-negative, got {tol}")
    centers = seed_centers(points, k, rng)
    return lloyd(points, centers, max_iter=max_iter, tol=tol)


def write_clustering_csv(clustering: Clustering, assignment_path: str | Path,
                         means_path: str | Path) -> None:
    with open(assignment_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "cluster"])
        w.writerows((i, int(c)) for i, c in enumerate(clustering.assignment))
    with open(means_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster", "mean_x", "mean_y"])
        for c, (x, y) in enumerate(clustering.means):
            w.writerow([c, repr(float(x)), repr(float(y))])
