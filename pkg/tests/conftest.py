"""Shared oracles and fixtures for the test suite.

The oracle helpers are deliberately independent re-implementations
(naive DFT, greedy SSE-based agglomeration, exhaustive assignment
search) so library results are checked against a second code path.
"""

from functools import lru_cache
import itertools

import numpy as np
import pytest

from cohsel.spectral import build_feature_matrix
from cohsel.synth import PlantedCoupling, SynthSpec, generate


def naive_dft(x: np.ndarray) -> np.ndarray:
    """Direct O(n^2) one-sided DFT of a real vector (no padding)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    k = np.arange(n // 2 + 1)
    ang = -2j * np.pi * np.outer(k, np.arange(n)) / n
    return np.exp(ang) @ x


def adjusted_rand_index(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    table = np.array([[np.sum((a == i) & (b == j))
                       for j in np.unique(b)] for i in np.unique(a)])

    def comb2(x):
        return x * (x - 1) / 2.0

    s = comb2(table).sum()
    ra = comb2(table.sum(axis=1)).sum()
    rb = comb2(table.sum(axis=0)).sum()
    expected = ra * rb / comb2(n)
    maximum = (ra + rb) / 2.0
    if maximum == expected:
        return 1.0
    return float((s - expected) / (maximum - expected))


def same_partition(a, b) -> bool:
    """Label-permutation-invariant partition equality."""
    return adjusted_rand_index(a, b) == 1.0


def greedy_ward_oracle(points: np.ndarray, m: int) -> np.ndarray:
    """Agglomerate by direct SSE-increase evaluation at every step."""
    points = np.asarray(points, dtype=float)
    clusters = [[i] for i in range(len(points))]

    def sse(idx):
        p = points[idx]
        return ((p - p.mean(axis=0)) ** 2).sum()

    while len(clusters) > m:
        best = None
        for i, j in itertools.combinations(range(len(clusters)), 2):
            cost = (sse(clusters[i] + clusters[j])
                    - sse(clusters[i]) - sse(clusters[j]))
            if best is None or cost < best[0] - 1e-12:
                best = (cost, i, j)
        _, i, j = best
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
    labels = np.empty(len(points), dtype=int)
    for c, idx in enumerate(clusters):
        labels[np.array(idx)] = c
    return labels


def exhaustive_two_cluster_oracle(points: np.ndarray):
    """Minimum-inertia assignment of <= ~12 points into two clusters."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    best = None
    for bits in range(1, 2 ** n - 1):
        labels = np.array([(bits >> i) & 1 for i in range(n)])
        inertia = sum(
            ((points[labels == c] - points[labels == c].mean(axis=0)) ** 2)
            .sum() for c in (0, 1))
        if best is None or inertia < best[0] - 1e-12:
            best = (inertia, labels)
    return best[1], best[0]


def planted_couplings() -> list[PlantedCoupling]:
    """Ten strong couplings with an XOR-style class structure.

    Class 1 trials activate feature group A (first half of the class) or
    group B (second half); class 2 trials activate group C, group D, or
    nothing, where C and D split A union B. The four full-group patterns
    satisfy A + B = C + D as feature vectors, so no linear classifier
    can separate all four groups. Per-coupling activation ranges are
    staggered so every coupling has a distinct pair of class-activation
    fractions, which keeps their pooled class-mean points apart.
    """
    s = 0.95

    def c(eeg, emg, band, label, start, end):
        return PlantedCoupling(eeg=eeg, emg=emg, band=band, label=label,
                               strength=s, start=start,
                               fraction=round(end - start, 6))

    return [
        c(0, 0, "gamma", "class1", 0.00, 0.57),
        c(0, 0, "gamma", "class2", 0.00, 0.40),
        c(1, 1, "gamma", "class1", 0.00, 0.64),
        c(1, 1, "gamma", "class2", 0.00, 0.37),
        c(2, 2, "gamma", "class1", 0.00, 0.71),
        c(2, 2, "gamma", "class2", 0.40, 0.70),
        c(3, 3, "gamma", "class1", 0.00, 0.78),
        c(3, 3, "gamma", "class2", 0.40, 0.75),
        c(0, 1, "beta", "class1", 0.00, 0.55),
        c(0, 1, "beta", "class2", 0.40, 0.85),
        c(2, 3, "beta", "class1", 0.00, 0.50),
        c(2, 3, "beta", "class2", 0.40, 0.90),
        c(4, 0, "gamma", "class1", 0.60, 1.00),
        c(4, 0, "gamma", "class2", 0.40, 0.80),
        c(5, 1, "beta", "class1", 0.58, 1.00),
        c(5, 1, "beta", "class2", 0.00, 0.34),
        c(6, 2, "beta", "class1", 0.54, 1.00),
        c(6, 2, "beta", "class2", 0.00, 0.30),
        c(7, 3, "beta", "class1", 0.50, 1.00),
        c(7, 3, "beta", "class2", 0.00, 0.26),
    ]


def planted_spec(seed: int = 7, n_trials_per_class: int = 200) -> SynthSpec:
    return SynthSpec(n_trials_per_class=n_trials_per_class, n_eeg=8, n_emg=4,
                     segment_seconds=8.0, planted=planted_couplings(),
                     seed=seed)


@lru_cache(maxsize=1)
def planted_dataset():
    """(FeatureMatrix, truth columns) of the planted benchmark dataset."""
    trials, truth = generate(planted_spec())
    return build_feature_matrix(trials), truth


@pytest.fixture(scope="session")
def planted_features():
    return planted_dataset()
