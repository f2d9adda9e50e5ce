"""Base clustering algorithms for the consensus stage.

Agglomerative hierarchical clustering with Ward linkage, normalized-cut
spectral clustering, and the k-means primitive the latter relies on.
All operations are deterministic given their seed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from .errors import DisconnectedGraphError, InvalidClusterCountError

#: Restarts used by k-means; best inertia wins, seeds derived from the caller's.
KMEANS_RESTARTS = 10


@dataclass
class SimilarityGraph:
    """Gaussian-kernel k-NN similarity graph parameters.

    ``bandwidth=None`` uses the median positive pairwise distance.
    """

    knn: int = 10
    bandwidth: float | None = None


def _relabel(assignment: np.ndarray) -> np.ndarray:
    """Renumber cluster ids by order of first appearance."""
    mapping: dict[int, int] = {}
    out = np.empty(len(assignment), dtype=int)
    for i, c in enumerate(assignment):
        out[i] = mapping.setdefault(int(c), len(mapping))
    return out


def _check_count(points: np.ndarray, m: int):
    if not 1 <= m <= points.shape[0]:
        raise InvalidClusterCountError(
            f"cluster count {m} invalid for {points.shape[0]} points")


def ward_linkage(points: np.ndarray) -> np.ndarray:
    """Full Ward merge tree (scipy linkage matrix) for later cuts."""
    return linkage(np.asarray(points, dtype=float), method="ward")


def cut_tree(tree: np.ndarray, m: int) -> np.ndarray:
    labels = fcluster(tree, t=m, criterion="maxclust")
    return _relabel(labels)


def ward_cluster(points: np.ndarray, m: int) -> np.ndarray:
    """Cut the Ward dendrogram of ``points`` into exactly ``m`` clusters."""
    points = np.asarray(points, dtype=float)
    _check_count(points, m)
    if m == points.shape[0]:
        return np.arange(m)
    return cut_tree(ward_linkage(points), m)


def kmeans(points: np.ndarray, m: int, seed: int = 0, max_iter: int = 300,
           restarts: int = KMEANS_RESTARTS):
    """Lloyd's algorithm from k-means++ starts; returns (labels, centers).

    The best of ``restarts`` runs by final inertia is kept. An empty
    cluster is re-seeded at the point farthest from its assigned center.
    """
    points = np.asarray(points, dtype=float)
    _check_count(points, m)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        labels, centers, inertia = _kmeans_once(points, m, rng, max_iter)
        if best is None or inertia < best[2] - 1e-12:
            best = (labels, centers, inertia)
    labels = _relabel(best[0])
    # Reorder centers to match the renumbered labels.
    centers = np.empty_like(best[1])
    centers[labels] = best[1][best[0]]
    return labels, centers


def _kmeans_once(points: np.ndarray, m: int, rng, max_iter: int):
    n = points.shape[0]
    centers = points[_kmeanspp(points, m, rng)].copy()
    prev_labels = None
    prev_inertia = None
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        for c in range(m):
            mask = labels == c
            if mask.any():
                continue
            far = d2[np.arange(n), labels].argmax()
            labels[far] = c
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        for c in range(m):
            centers[c] = points[labels == c].mean(axis=0)
        inertia = ((points - centers[labels]) ** 2).sum()
        if prev_inertia is not None and \
                prev_inertia - inertia <= 1e-6 * max(inertia, 1e-12):
            break
        prev_inertia = inertia
        prev_labels = labels
    inertia = ((points - centers[labels]) ** 2).sum()
    return labels, centers, inertia


def _kmeanspp(points: np.ndarray, m: int, rng) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, m):
        total = d2.sum()
        if total <= 0:
            # Remaining points coincide with chosen centers.
            candidates = np.setdiff1d(np.arange(n), chosen)
            chosen.append(int(candidates[0]) if len(candidates) else chosen[0])
        else:
            chosen.append(int(rng.choice(n, p=d2 / total)))
        d2 = np.minimum(d2, ((points - points[chosen[-1]]) ** 2).sum(axis=1))
    return np.array(chosen)


def similarity_graph_weights(points: np.ndarray,
                             graph: SimilarityGraph) -> np.ndarray:
    """Symmetric Gaussian-kernel k-NN affinity matrix (union symmetrized)."""
    n = points.shape[0]
    dist = squareform(pdist(points)) if n > 1 else np.zeros((1, 1))
    positive = dist[dist > 0]
    bandwidth = graph.bandwidth
    if bandwidth is None:
        bandwidth = float(np.median(positive)) if positive.size else 1.0
    if bandwidth <= 0:
        bandwidth = 1.0
    weights = np.exp(-dist ** 2 / (2.0 * bandwidth ** 2))
    # Keep structural edges alive even when the kernel underflows to 0.
    weights = np.maximum(weights, np.finfo(float).tiny)
    k = min(graph.knn, n - 1)
    if k < n - 1:
        keep = np.zeros((n, n), dtype=bool)
        order = np.argsort(dist, axis=1, kind="stable")
        for i in range(n):
            neighbors = [j for j in order[i] if j != i][:k]
            keep[i, neighbors] = True
        keep |= keep.T
        weights = np.where(keep, weights, 0.0)
    np.fill_diagonal(weights, 0.0)
    return weights


def spectral_embedding(points: np.ndarray,
                       graph: SimilarityGraph | None = None) -> np.ndarray:
    """Eigenvectors of the symmetric normalized Laplacian, ascending.

    Returns the full (n, n) eigenvector matrix so callers can reuse one
    decomposition for several cluster counts.
    """
    points = np.asarray(points, dtype=float)
    weights = similarity_graph_weights(points, graph or SimilarityGraph())
    n_comp, _ = connected_components(weights > 0, directed=False)
    if points.shape[0] > 1 and n_comp > 1:
        raise DisconnectedGraphError(
            f"similarity graph has {n_comp} connected components")
    degree = weights.sum(axis=1)
    inv_sqrt = np.where(degree > 0, degree, 1.0) ** -0.5
    lap = np.eye(len(weights)) - inv_sqrt[:, None] * weights * inv_sqrt[None, :]
    _, vectors = np.linalg.eigh(lap)
    return vectors


def cluster_from_embedding(vectors: np.ndarray, m: int,
                           seed: int = 0) -> np.ndarray:
    """Row-normalize the first ``m`` eigenvectors and k-means them."""
    emb = vectors[:, :m]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb = emb / np.where(norms > 0, norms, 1.0)
    labels, _ = kmeans(emb, m, seed=seed)
    return labels


def spectral_cluster(points: np.ndarray, m: int,
                     graph: SimilarityGraph | None = None,
                     seed: int = 0) -> np.ndarray:
    """Normalized-cut spectral clustering into ``m`` clusters."""
    points = np.asarray(points, dtype=float)
    _check_count(points, m)
    if m == 1:
        return np.zeros(points.shape[0], dtype=int)
    vectors = spectral_embedding(points, graph)
    return cluster_from_embedding(vectors, m, seed=seed)
