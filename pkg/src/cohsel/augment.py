"""Feature scaling and minority-class oversampling."""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientNeighborsError


@dataclass
class MinMaxScaler:
    """Per-column min-max scaler fitted on training rows only.

    Constant columns map to 0.5; rows transformed later (validation, test)
    are clipped into [0, 1] so out-of-range values cannot leak scale
    information.
    """

    col_min: np.ndarray
    col_max: np.ndarray

    @classmethod
    def fit(cls, train: np.ndarray) -> "MinMaxScaler":
        train = np.asarray(train, dtype=float)
        if train.ndim != 2 or train.shape[0] < 2:
            raise ValueError("need a 2-D matrix with at least 2 rows")
        return cls(col_min=train.min(axis=0), col_max=train.max(axis=0))

    def transform(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        span = self.col_max - self.col_min
        out = np.full_like(rows, 0.5)
        ok = span > 0
        out[:, ok] = (rows[:, ok] - self.col_min[ok]) / span[ok]
        return np.clip(out, 0.0, 1.0)

    def inverse_transform(self, rows: np.ndarray) -> np.ndarray:
        """Map scaled rows back to the original units.

        Constant columns recover their training value regardless of the
        scaled entry.
        """
        rows = np.asarray(rows, dtype=float)
        span = self.col_max - self.col_min
        out = np.tile(self.col_min, (rows.shape[0], 1))
        ok = span > 0
        out[:, ok] = rows[:, ok] * span[ok] + self.col_min[ok]
        return out


def fit_scale(train: np.ndarray):
    """Fit a min-max scaler on ``train`` and return (scaled, scaler)."""
    scaler = MinMaxScaler.fit(train)
    return scaler.transform(train), scaler


def smote(rows: np.ndarray, target_count: int, k: int = 5,
          seed: int = 0) -> np.ndarray:
    """Synthesize minority rows by interpolating toward nearest neighbors.

    Each synthetic row is ``x + u * (nn - x)`` with ``u`` uniform in
    [0, 1) and ``nn`` one of ``x``'s ``k`` Euclidean nearest minority
    neighbors. Returns the ``target_count - len(rows)`` synthetic rows
    only; deterministic for a fixed seed.
    """
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[0]
    if n <= k:
        raise InsufficientNeighborsError(
            f"{n} minority rows cannot supply k={k} neighbors")
    if target_count < n:
        raise ValueError("target_count below current minority count")
    n_new = target_count - n
    if n_new == 0:
        return np.empty((0, rows.shape[1]))

    d2 = ((rows[:, None, :] - rows[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]

    rng = np.random.default_rng(seed)
    base = rng.integers(0, n, size=n_new)
    pick = rng.integers(0, k, size=n_new)
    u = rng.random(n_new)
    nn = neighbors[base, pick]
    return rows[base] + u[:, None] * (rows[nn] - rows[base])


def balance_classes(values: np.ndarray, labels: np.ndarray, k: int = 5,
                    seed: int = 0):
    """Equalize the two class counts by oversampling the smaller one.

    Returns ``(values, labels)`` with synthetic minority rows appended; a
    no-op when the classes are already balanced.
    """
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) != 2:
        raise ValueError(f"exactly two classes required, got {list(classes)}")
    if counts[0] == counts[1]:
        return values, labels
    minority = classes[np.argmin(counts)]
    target = counts.max()
    synthetic = smote(values[labels == minority], int(target), k=k, seed=seed)
    values = np.vstack([values, synthetic])
    labels = np.concatenate([labels, np.full(len(synthetic), minority,
                                             dtype=labels.dtype)])
    return values, labels
