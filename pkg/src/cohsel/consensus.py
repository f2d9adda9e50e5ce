"""Consensus of base clusterings and agreement-filtered feature selection.

Two base partitions of the pooled feature points are merged into a
consensus matrix; features whose co-clustering survives the agreement
thresholds are re-clustered, and one representative feature per final
cluster is selected.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cluster import (
    SimilarityGraph,
    cluster_from_embedding,
    cut_tree,
    spectral_embedding,
    ward_cluster,
    ward_linkage,
)
from .errors import DisconnectedGraphError, InfeasibleCombination


@dataclass(frozen=True)
class ConsensusParams:
    """One grid point: cluster/selection count and agreement thresholds."""

    m: int
    sigma: float
    nu: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must lie in [0, 1]")
        if self.nu < 0:
            raise ValueError("nu must be >= 0")

    def as_list(self) -> list:
        return [self.m, self.sigma, self.nu]


@dataclass
class FeatureSelection:
    """Ordered selected feature indices and the parameters that produced them."""

    selected: list[int]
    params: ConsensusParams


def similarity_matrix(assignment: np.ndarray) -> np.ndarray:
    """Binary co-membership matrix of one partition (unit diagonal)."""
    assignment = np.asarray(assignment)
    return (assignment[:, None] == assignment[None, :]).astype(float)


def consensus_matrix(similarities: list[np.ndarray]) -> np.ndarray:
    """Element-wise mean of equally shaped similarity matrices."""
    if not similarities:
        raise ValueError("at least one similarity matrix required")
    shape = similarities[0].shape
    for s in similarities[1:]:
        if s.shape != shape:
            raise ValueError(f"shape mismatch: {s.shape} vs {shape}")
    return np.mean(similarities, axis=0)


def consensus_filter(cm: np.ndarray, sigma: float, nu: int) -> np.ndarray:
    """Indices of features agreeing with strictly more than ``nu`` partners.

    A partner is any other feature whose consensus entry is strictly
    greater than ``sigma``.
    """
    cm = np.asarray(cm)
    agree = cm > sigma
    np.fill_diagonal(agree, False)
    partners = agree.sum(axis=1)
    return np.flatnonzero(partners > nu)


class ConsensusSelector:
    """Feature selection over a fixed pooled point set.

    Caches the Ward merge tree and the spectral embedding so a parameter
    grid can be swept without redoing the expensive decompositions.
    """

    def __init__(self, points: np.ndarray,
                 graph: SimilarityGraph | None = None):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 2:
            raise ValueError("need a 2-D point set with at least 2 points")
        self.graph = graph or SimilarityGraph()

    @cached_property
    def _tree(self) -> np.ndarray:
        return ward_linkage(self.points)

    @cached_property
    def _embedding(self) -> np.ndarray:
        # Densify the k-NN graph until it connects; a disconnected graph
        # leaves the normalized-cut embedding undefined.
        graph = self.graph
        while True:
            try:
                return spectral_embedding(self.points, graph)
            except DisconnectedGraphError:
                if graph.knn >= self.points.shape[0] - 1:
                    raise
                graph = SimilarityGraph(
                    knn=min(2 * graph.knn, self.points.shape[0] - 1),
                    bandwidth=graph.bandwidth)

    def base_partitions(self, m: int, seed: int = 0):
        ward = cut_tree(self._tree, m)
        spectral = cluster_from_embedding(self._embedding, m, seed=seed)
        return ward, spectral

    def select(self, params: ConsensusParams, seed: int = 0) -> FeatureSelection:
        """Run the full consensus pass for one parameter combination."""
        n = self.points.shape[0]
        if params.m > n:
            raise InfeasibleCombination(
                f"m={params.m} exceeds {n} available features")
        ward, spectral = self.base_partitions(params.m, seed=seed)
        cm = consensus_matrix([similarity_matrix(ward),
                               similarity_matrix(spectral)])
        survivors = consensus_filter(cm, params.sigma, params.nu)
        if survivors.size < params.m:
            raise InfeasibleCombination(
                f"{survivors.size} survivors for m={params.m}, "
                f"sigma={params.sigma}, nu={params.nu}")
        final = ward_cluster(self.points[survivors], params.m)
        selected = []
        for c in range(params.m):
            members = survivors[final == c]
            centroid = self.points[members].mean(axis=0)
            d2 = ((self.points[members] - centroid) ** 2).sum(axis=1)
            # Ties resolved toward the lowest feature index.
            selected.append(int(members[np.lexsort((members, d2))[0]]))
        return FeatureSelection(selected=sorted(selected), params=params)


def select_features(points: np.ndarray, params: ConsensusParams,
                    seed: int = 0,
                    graph: SimilarityGraph | None = None) -> FeatureSelection:
    """One-shot wrapper over :class:`ConsensusSelector`."""
    return ConsensusSelector(points, graph=graph).select(params, seed=seed)
