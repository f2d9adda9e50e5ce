"""Base clustering algorithms against brute-force oracles."""

import numpy as np
import pytest

from conftest import (
    adjusted_rand_index,
    exhaustive_two_cluster_oracle,
    greedy_ward_oracle,
    same_partition,
)
from cohsel.cluster import (
    SimilarityGraph,
    kmeans,
    similarity_graph_weights,
    spectral_cluster,
    spectral_embedding,
    ward_cluster,
    ward_linkage,
)
from cohsel.errors import DisconnectedGraphError, InvalidClusterCountError


class TestWard:
    def test_m_equals_p_gives_singletons(self):
        pts = np.random.default_rng(0).random((5, 2))
        assert np.array_equal(ward_cluster(pts, 5), np.arange(5))

    def test_m_one_gives_single_cluster(self):
        pts = np.random.default_rng(1).random((5, 2))
        assert np.array_equal(ward_cluster(pts, 1), np.zeros(5, dtype=int))

    def test_matches_greedy_sse_oracle_on_seven_points(self):
        for seed in range(30):
            pts = np.random.default_rng(seed).random((7, 2))
            for m in (2, 3, 4):
                assert same_partition(ward_cluster(pts, m),
                                      greedy_ward_oracle(pts, m))

    def test_merge_heights_nondecreasing(self):
        pts = np.random.default_rng(2).random((12, 2))
        heights = ward_linkage(pts)[:, 2]
        assert np.all(np.diff(heights) >= -1e-12)

    def test_invalid_count_rejected(self):
        with pytest.raises(InvalidClusterCountError):
            ward_cluster(np.random.default_rng(3).random((4, 2)), 5)


class TestKmeans:
    def test_points_at_center_locations_converge_immediately(self):
        pts = np.array([[0.0, 0.0], [5.0, 5.0], [9.0, 0.0]])
        labels, centers = kmeans(pts, 3, seed=4)
        inertia = ((pts - centers[labels]) ** 2).sum()
        assert inertia == 0.0
        assert sorted(labels.tolist()) == [0, 1, 2]

    def test_matches_exhaustive_assignment_on_six_points(self):
        for seed in range(30):
            pts = np.random.default_rng(seed).random((6, 2))
            oracle_labels, oracle_inertia = exhaustive_two_cluster_oracle(pts)
            labels, centers = kmeans(pts, 2, seed=seed)
            inertia = ((pts - centers[labels]) ** 2).sum()
            assert abs(inertia - oracle_inertia) < 1e-9
            assert same_partition(labels, oracle_labels)

    def test_deterministic_given_seed(self):
        pts = np.random.default_rng(5).random((20, 2))
        a, ca = kmeans(pts, 4, seed=6)
        b, cb = kmeans(pts, 4, seed=6)
        assert np.array_equal(a, b) and np.array_equal(ca, cb)

    def test_centers_aligned_with_labels(self):
        pts = np.random.default_rng(7).random((30, 2))
        labels, centers = kmeans(pts, 3, seed=8)
        for c in range(3):
            assert np.allclose(centers[c], pts[labels == c].mean(axis=0),
                               atol=1e-9)

    def test_local_optimum_no_single_point_move_improves(self):
        pts = np.random.default_rng(9).random((15, 2))
        labels, centers = kmeans(pts, 3, seed=10)

        def inertia_of(lab):
            return sum(((pts[lab == c] - pts[lab == c].mean(axis=0)) ** 2)
                       .sum() for c in range(3) if np.any(lab == c))

        base = inertia_of(labels)
        for i in range(len(pts)):
            for c in range(3):
                if c == labels[i] or np.sum(labels == labels[i]) == 1:
                    continue
                moved = labels.copy()
                moved[i] = c
                assert inertia_of(moved) >= base - 1e-9

    def test_duplicate_points_do_not_crash(self):
        pts = np.zeros((6, 2))
        labels, _ = kmeans(pts, 2, seed=11)
        assert len(labels) == 6

    def test_invalid_count_rejected(self):
        with pytest.raises(InvalidClusterCountError):
            kmeans(np.zeros((3, 2)), 4)


class TestSpectral:
    @staticmethod
    def _blobs(seed, per_blob=10):
        rng = np.random.default_rng(seed)
        pts = np.vstack([rng.normal(0.0, 0.1, (per_blob, 2)),
                         rng.normal(5.0, 0.1, (per_blob, 2))])
        return pts, np.repeat([0, 1], per_blob)

    def test_two_blobs_recovered_on_twenty_seeds(self):
        for seed in range(20):
            pts, truth = self._blobs(seed)
            labels = spectral_cluster(pts, 2, seed=seed)
            assert adjusted_rand_index(labels, truth) == 1.0

    def test_m_one_single_cluster(self):
        pts, _ = self._blobs(0)
        assert np.array_equal(spectral_cluster(pts, 1),
                              np.zeros(len(pts), dtype=int))

    def test_nonconvex_ring_and_center(self):
        rng = np.random.default_rng(3)
        theta = np.linspace(0, 2 * np.pi, 45, endpoint=False)
        ring = np.column_stack([3 * np.cos(theta), 3 * np.sin(theta)])
        ring += rng.normal(0, 0.05, ring.shape)
        center = rng.normal(0, 0.3, (15, 2))
        pts = np.vstack([ring, center])
        truth = np.repeat([0, 1], [45, 15])
        labels = spectral_cluster(
            pts, 2, graph=SimilarityGraph(knn=15, bandwidth=0.5), seed=0)
        assert adjusted_rand_index(labels, truth) == 1.0

    def test_disconnected_graph_rejected(self):
        rng = np.random.default_rng(4)
        pts = np.vstack([rng.normal(0.0, 0.01, (8, 2)),
                         rng.normal(100.0, 0.01, (8, 2))])
        with pytest.raises(DisconnectedGraphError):
            spectral_cluster(pts, 2, graph=SimilarityGraph(knn=3))

    def test_laplacian_spectrum_properties(self):
        pts, _ = self._blobs(5)
        weights = similarity_graph_weights(pts, SimilarityGraph())
        degree = weights.sum(axis=1)
        inv_sqrt = np.where(degree > 0, degree, 1.0) ** -0.5
        lap = np.eye(len(weights)) \
            - inv_sqrt[:, None] * weights * inv_sqrt[None, :]
        eigvals = np.linalg.eigvalsh(lap)
        assert eigvals.min() >= -1e-10
        assert abs(eigvals[0]) < 1e-8

    def test_similarity_weights_symmetric_zero_diagonal(self):
        pts = np.random.default_rng(6).random((12, 2))
        weights = similarity_graph_weights(pts, SimilarityGraph(knn=4))
        assert np.array_equal(weights, weights.T)
        assert np.all(np.diag(weights) == 0.0)

    def test_embedding_reusable_across_counts(self):
        pts, truth = self._blobs(7)
        vectors = spectral_embedding(pts)
        assert vectors.shape == (len(pts), len(pts))

    def test_deterministic_given_seed(self):
        pts, _ = self._blobs(8)
        assert np.array_equal(spectral_cluster(pts, 2, seed=9),
                              spectral_cluster(pts, 2, seed=9))

    def test_invalid_count_rejected(self):
        with pytest.raises(InvalidClusterCountError):
            spectral_cluster(np.zeros((3, 2)), 4)
