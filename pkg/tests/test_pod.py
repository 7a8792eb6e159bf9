"""
Snapshot POD and clustered local basis tests
"""

import numpy as np
import pytest

from exceptions import ClusteringFailedError, InvalidParameterError, RankDeficientError
from reduction.clustering import (
    LpodParams,
    enlarge_clusters,
    kmeans_lloyd,
    lloyd_iterations,
    lpod_offline,
    lpod_reproduction_error,
)
from reduction.pod import (
    SnapshotSet,
    covariance_spectrum,
    dimension_for_ratio,
    numerical_rank,
    projection_error,
    snapshot_pod,
)
from utils.helpers import RngStream


@pytest.fixture
def low_rank_snapshots():
    """Rank-5 snapshots (200 x 40) with a zero first column"""
    rng = np.random.default_rng(3)
    U = rng.standard_normal((200, 5)) @ rng.standard_normal((5, 40))
    U[:, 0] = 0.0
    return U


def test_two_axis_snapshots():
    """Test U = [a e1, b e2] recovers the axes and eigenvalues ~ a^2, b^2"""
    U = np.zeros((4, 2))
    U[0, 0], U[1, 1] = 3.0, 1.0
    basis = snapshot_pod(U, d=2)
    np.testing.assert_allclose(np.abs(basis.psi[:2]), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(basis.eigenvalues, [9.0, 1.0])


def test_single_snapshot_basis():
    """Test one nonzero snapshot gives psi = u / |u|"""
    u = np.array([1.0, 2.0, 2.0])
    U = np.column_stack([np.zeros(3), u])
    psi = snapshot_pod(U, d=1).psi[:, 0]
    np.testing.assert_allclose(np.abs(psi), u / 3.0, atol=1e-12)


def test_basis_is_orthonormal(low_rank_snapshots):
    """Test psi^T psi = I"""
    psi = snapshot_pod(low_rank_snapshots, d=5).psi
    np.testing.assert_allclose(psi.T @ psi, np.eye(5), atol=1e-10)


def test_reconstruction_error_decreases_with_d(low_rank_snapshots):
    """Test error is nonincreasing in d and vanishes at the rank"""
    errors = [projection_error(low_rank_snapshots, snapshot_pod(low_rank_snapshots, d=d).psi) for d in range(1, 6)]
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1e-8


def test_pod_beats_random_subspaces(low_rank_snapshots):
    """Test optimality against random orthonormal competitors"""
    rng = np.random.default_rng(7)
    U = low_rank_snapshots
    psi = snapshot_pod(U, d=3).psi
    best = np.linalg.norm(U - psi @ (psi.T @ U))
    for _ in range(100):
        Q, _ = np.linalg.qr(rng.standard_normal((U.shape[0], 3)))
        assert best <= np.linalg.norm(U - Q @ (Q.T @ U)) + 1e-9


def test_dimension_above_rank_rejected(low_rank_snapshots):
    """Test d beyond the numerical rank raises RankDeficient"""
    with pytest.raises(RankDeficientError):
        snapshot_pod(low_rank_snapshots, d=6)


def test_exactly_one_of_d_or_ratio():
    """Test d and ratio are mutually exclusive"""
    U = np.eye(3)
    with pytest.raises(InvalidParameterError):
        snapshot_pod(U)
    with pytest.raises(InvalidParameterError):
        snapshot_pod(U, d=1, ratio=0.9)


def test_information_ratio_selects_dimension():
    """Test the smallest d whose cumulative fraction exceeds the ratio"""
    eigenvalues = np.array([6.0, 3.0, 1.0, 0.0])
    assert dimension_for_ratio(eigenvalues, 0.5) == 1
    assert dimension_for_ratio(eigenvalues, 0.6) == 2
    assert dimension_for_ratio(eigenvalues, 0.9) == 3
    assert dimension_for_ratio(eigenvalues, 1.0) == 3


def test_spectrum_is_descending_and_clamped(low_rank_snapshots):
    """Test eigenvalues are sorted and non-negative"""
    eigenvalues, _ = covariance_spectrum(low_rank_snapshots)
    assert np.all(np.diff(eigenvalues) <= 0.0)
    assert np.all(eigenvalues >= 0.0)
    assert numerical_rank(eigenvalues) == 5


def test_snapshot_set_validation():
    """Test a single column and non-finite entries are rejected"""
    with pytest.raises(InvalidParameterError):
        SnapshotSet(U=np.zeros((3, 1)))
    with pytest.raises(InvalidParameterError):
        SnapshotSet(U=np.array([[0.0, np.nan], [0.0, 1.0]]))


def test_kmeans_separated_pairs():
    """Test {0, 1, 10, 11} splits into two pairs"""
    U = np.array([[0.0, 1.0, 10.0, 11.0], [0.0, 0.0, 0.0, 0.0]])
    centroids, clusters = kmeans_lloyd(U, 2, RngStream(42), min_core=2)
    groups = sorted(tuple(c.tolist()) for c in clusters)
    assert groups == [(0, 1), (2, 3)]
    np.testing.assert_allclose(sorted(centroids[0]), [0.5, 10.5])


def test_kmeans_single_cluster(low_rank_snapshots):
    """Test k = 1 gives the column mean"""
    centroids, clusters = kmeans_lloyd(low_rank_snapshots, 1, RngStream(0))
    np.testing.assert_allclose(centroids[:, 0], low_rank_snapshots.mean(axis=1))
    assert clusters[0].size == low_rank_snapshots.shape[1]


def test_kmeans_one_cluster_per_snapshot():
    """Test k = s puts every snapshot in its own cluster"""
    U = np.array([[0.0, 1.0, 5.0, 9.0]])
    centroids, clusters = kmeans_lloyd(U, 4, RngStream(1), min_core=1)
    assert sorted(c.size for c in clusters) == [1, 1, 1, 1]
    np.testing.assert_allclose(np.sort(centroids[0]), U[0])


def test_lloyd_cost_nonincreasing(low_rank_snapshots):
    """Test the k-means objective never grows"""
    initial = low_rank_snapshots[:, [1, 2, 3]]
    costs = lloyd_iterations(low_rank_snapshots, initial).costs
    assert all(b <= a + 1e-9 for a, b in zip(costs, costs[1:]))


def test_kmeans_restart_budget():
    """Test an unattainable core size exhausts the restarts"""
    U = np.array([[0.0, 0.1, 0.2, 50.0]])
    with pytest.raises(ClusteringFailedError):
        kmeans_lloyd(U, 2, RngStream(0), min_core=3, restarts=5)


def test_enlarge_without_softening_is_identity():
    """Test r = 0 with a small size_min leaves clusters unchanged"""
    U = np.arange(6, dtype=float)[None]
    clusters = [np.array([0, 1, 2]), np.array([3, 4, 5])]
    centroids = np.array([[1.0, 4.0]])
    enlarged = enlarge_clusters(U, centroids, clusters, r=0.0, size_min=1, size_max=50)
    assert [c.tolist() for c in enlarged] == [[0, 1, 2], [3, 4, 5]]


def test_enlarge_capped_at_snapshot_count():
    """Test a cluster of 3 grows to all 5 snapshots when size_min exceeds s"""
    U = np.arange(5, dtype=float)[None]
    enlarged = enlarge_clusters(
        U, np.array([[1.0]]), [np.array([0, 1, 2])], r=1.0, size_min=30, size_max=50
    )
    assert enlarged[0].tolist() == [0, 1, 2, 3, 4]


def test_enlarge_adds_nearest_snapshots():
    """Test growth picks the snapshots closest to the centroid"""
    U = np.array([[0.0, 1.0, 2.0, 3.0, 10.0, 11.0]])
    enlarged = enlarge_clusters(
        U, np.array([[0.5]]), [np.array([0, 1])], r=1.0, size_min=1, size_max=50
    )
    assert enlarged[0].tolist() == [0, 1, 2, 3]


def test_default_cluster_sizes():
    """Test k = 6, r = 1, bounds [30, 50] on s = 100"""
    rng = np.random.default_rng(11)
    U = rng.standard_normal((20, 100))
    model = lpod_offline(U, LpodParams(k=6, r=1.0, core_min=1), RngStream(42), d=5)
    sizes = [c.size for c in model.clusters]
    assert all(30 <= size <= 50 for size in sizes)
    covered = np.unique(np.concatenate(model.clusters))
    assert covered.size == 100


def test_lpod_single_cluster_spans_training_data(low_rank_snapshots):
    """Test k = 1 with full local rank reproduces every snapshot"""
    params = LpodParams(k=1, r=0.0, core_min=1, size_min=1, size_max=100)
    model = lpod_offline(low_rank_snapshots, params, RngStream(42), d=5)
    assert model.k == 1
    assert lpod_reproduction_error(low_rank_snapshots, model) < 1e-8
    psi = model.bases[0].psi
    np.testing.assert_allclose(psi.T @ psi, np.eye(psi.shape[1]), atol=1e-10)


def test_lpod_is_deterministic(low_rank_snapshots):
    """Test the same seed gives the same clustering"""
    params = LpodParams(k=3, r=0.5, core_min=2, size_min=5, size_max=30)
    first = lpod_offline(low_rank_snapshots, params, RngStream(42), d=2)
    second = lpod_offline(low_rank_snapshots, params, RngStream(42), d=2)
    np.testing.assert_array_equal(first.centroids, second.centroids)
    assert all(np.array_equal(a, b) for a, b in zip(first.clusters, second.clusters))


def test_lpod_clamps_dimension_to_cluster_rank():
    """Test d larger than a cluster's rank is clamped"""
    U = np.zeros((10, 6))
    U[0, 1:3] = [1.0, 2.0]
    U[1, 3:6] = [5.0, 6.0, 7.0]
    params = LpodParams(k=1, r=0.0, core_min=1, size_min=1, size_max=10)
    model = lpod_offline(U, params, RngStream(0), d=5)
    assert model.bases[0].d == 2


def test_lpod_needs_exactly_one_size_rule(low_rank_snapshots):
    """Test omitting both d and ratio, or giving both, is rejected before clustering"""
    params = LpodParams(k=2, r=0.0, core_min=1, size_min=1, size_max=40)
    with pytest.raises(InvalidParameterError):
        lpod_offline(low_rank_snapshots, params, RngStream(42))
    with pytest.raises(InvalidParameterError):
        lpod_offline(low_rank_snapshots, params, RngStream(42), d=2, ratio=0.9)
