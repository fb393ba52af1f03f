import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterkeys.cluster import (assign_points, kmeanspp, lloyd, objective, seed_centers,
                                 update_means, write_clustering_csv)
from clusterkeys.deploy import distance, generate_deployment, make_rng
from clusterkeys.errors import ClusteringError

from conftest import brute_force_partition


def test_seed_centers_are_input_points():
    pts = generate_deployment(4000, 1000, 1).positions
    centers = seed_centers(pts, 4, make_rng(5))
    assert centers.shape == (4, 2)
    for c in centers:
        assert np.any(np.all(pts == c, axis=1))


def test_seed_single_center():
    pts = np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 1.0]])
    centers = seed_centers(pts, 1, make_rng(0))
    assert len(centers) == 1


@pytest.mark.parametrize("seed", range(20))
def test_seed_skips_colocated_duplicate(seed):
    # weights after first pick are (0, 0, 100) or (100, 100, 0): the zero entries are never drawn
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [10.0, 0.0]])
    a, b = seed_centers(pts, 2, make_rng(seed))
    assert distance(a, b) == 10.0


def test_seed_fails_without_enough_distinct_points():
    pts = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(ClusteringError):
        seed_centers(pts, 3, make_rng(0))
    with pytest.raises(ClusteringError):
        seed_centers(pts, 4, make_rng(0))


def test_assign_points_examples():
    assert assign_points([(0, 0), (10, 10)], [(0, 0), (10, 10)]).tolist() == [0, 1]
    assert assign_points([(5, 5)], [(0, 0), (10, 10)]).tolist() == [0]


def test_assign_points_matches_exhaustive_table():
    pts = [(0, 0), (1, 4), (6, 1), (3, 3), (9, 9), (4, 6)]
    means = [(1, 1), (7, 6)]
    expected = []
    for p in pts:
        d = [distance(p, m) for m in means]
        expected.append(d.index(min(d)))
    assert expected == [0, 0, 0, 0, 1, 1]
    assert assign_points(pts, means).tolist() == expected


@pytest.mark.parametrize("members,expected", [
    ([(0, 0), (2, 0), (0, 2), (2, 2)], (1, 1)),
    ([(3, 7)], (3, 7)),
    ([(1, 0), (2, 0), (6, 0)], (3, 0)),
])
def test_update_means_examples(members, expected):
    means = update_means(members, [0] * len(members), 1)
    assert tuple(means[0]) == pytest.approx(expected)


def test_empty_cluster_takes_farthest_point():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]])
    prev = np.array([[0.0, 0.0], [100.0, 100.0]])
    means = update_means(pts, [0, 0, 0], 2, previous_means=prev)
    assert tuple(means[0]) == pytest.approx((11 / 3, 0))
    assert tuple(means[1]) == (10.0, 0.0)


def test_objective_examples():
    assert objective([(1, 1), (2, 2)], [0, 1], [(1, 1), (2, 2)]) == 0
    assert objective([(3, 0)], [0], [(0, 0)]) == 9
    rng = make_rng(9)
    pts = rng.uniform(0, 10, (5, 2))
    means = rng.uniform(0, 10, (2, 2))
    labels = assign_points(pts, means)
    oracle = sum(distance(p, means[c]) ** 2 for p, c in zip(pts, labels))
    assert objective(pts, labels, means) == pytest.approx(oracle, rel=1e-12)


def test_two_blobs_split_cleanly():
    rng = make_rng(3)
    blob_a = rng.normal((100, 100), 5, (50, 2))
    blob_b = rng.normal((900, 900), 5, (50, 2))
    pts = np.vstack([blob_a, blob_b])
    result = kmeanspp(pts, 2, make_rng(4))
    labels = result.assignment
    assert len(set(labels[:50])) == 1 and len(set(labels[50:])) == 1
    assert labels[0] != labels[50]
    scatter = sum(float(((b - b.mean(axis=0)) ** 2).sum()) for b in (blob_a, blob_b))
    assert result.objective == pytest.approx(scatter, rel=1e-9)
    # on a 12-point subsample the exhaustive optimum is the same split
    sub = np.vstack([blob_a[:6], blob_b[:6]])
    sub_fit = kmeanspp(sub, 2, make_rng(4))
    assert sub_fit.objective == pytest.approx(brute_force_partition(sub, 2), rel=1e-9)


def test_k_equals_point_count_is_perfect_fit():
    pts = generate_deployment(7, 10, 11).positions
    result = kmeanspp(pts, 7, make_rng(0))
    assert result.objective == 0
    assert sorted(result.sizes().tolist()) == [1] * 7


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.integers(1, 6))
def test_lloyd_monotone_and_assignment_optimal(seed, n, k):
    k = min(k, n)
    pts = generate_deployment(n, 100, seed).positions
    result = kmeanspp(pts, k, make_rng(seed + 1))
    hist = result.history
    assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(hist, hist[1:]))
    d = np.sqrt(((pts[:, None, :] - result.means[None]) ** 2).sum(axis=2))
    chosen = d[np.arange(n), result.assignment]
    assert np.all(chosen <= d.min(axis=1) + 1e-12)
    assert result.objective == pytest.approx(
        objective(pts, result.assignment, result.means), rel=1e-9)
    assert result.sizes().sum() == n


def test_exhaustive_restarts_reach_optimum():
    rng = make_rng(77)
    pts = rng.uniform(0, 1, (8, 2))
    best = min(lloyd(pts, pts[list(c)]).objective
               for c in itertools.combinations(range(8), 3))
    assert best == pytest.approx(brute_force_partition(pts, 3), rel=1e-9)
    assert kmeanspp(pts, 3, make_rng(1)).objective >= best - 1e-12


def test_iteration_cap_respected():
    pts = generate_deployment(500, 100, 5).positions
    assert kmeanspp(pts, 5, make_rng(0), max_iter=2).iterations <= 2


def test_clustering_csv(tmp_path):
    pts = generate_deployment(20, 10, 1).positions
    result = kmeanspp(pts, 3, make_rng(0))
    write_clustering_csv(result, tmp_path / "a.csv", tmp_path / "m.csv")
    a = (tmp_path / "a.csv").read_text().splitlines()
    m = (tmp_path / "m.csv").read_text().splitlines()
    assert a[0] == "node_id,cluster" and len(a) == 21
    assert m[0] == "cluster,mean_x,mean_y" and len(m) == 4
