"""Binary kernel SVM trained through its dual problem.

The solver is a pairwise working-set dual method: the first index is the
maximal violator, the second is chosen by a second-order gain heuristic.
Linear and Gaussian (RBF) kernels are supported.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

LINEAR = "linear"
RBF = "rbf"
GAMMA_SCALE = "scale"

MAX_PAIR_UPDATES = 1_000_000
_TAU = 1e-12


def _kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str,
                   gamma: float) -> np.ndarray:
    if kernel == LINEAR:
        return a @ b.T
    if kernel == RBF:
        d2 = (np.sum(a ** 2, axis=1)[:, None]
              + np.sum(b ** 2, axis=1)[None, :] - 2.0 * (a @ b.T))
        return np.exp(-gamma * np.maximum(d2, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def resolve_gamma(x: np.ndarray, gamma) -> float:
    """Turn the "scale" setting into 1 / (n_features * mean column variance)."""
    if gamma == GAMMA_SCALE:
        var = float(np.mean(np.var(x, axis=0)))
        return 1.0 / (x.shape[1] * var) if var > 0 else 1.0 / x.shape[1]
    return float(gamma)


@dataclass
class SvmModel:
    """Trained classifier state sufficient for prediction and audits."""

    support_vectors: np.ndarray
    dual_coef: np.ndarray          # alpha_i * y_i of the support vectors
    bias: float
    kernel: str
    gamma: float                   # ignored by the linear kernel
    c: float
    classes: tuple[str, str]       # classes[0] maps to +1
    kkt_residual: float

    def decision_function(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(
                f"expected {self.support_vectors.shape[1]} features, "
                f"got {rows.shape[1]}")
        k = _kernel_matrix(rows, self.support_vectors, self.kernel, self.gamma)
        return k @ self.dual_coef + self.bias


def train(rows: np.ndarray, labels, kernel: str = RBF, c: float = 1.0,
          gamma=GAMMA_SCALE, tol: float = 1e-3, seed: int = 0,
          max_updates: int = MAX_PAIR_UPDATES) -> SvmModel:
    """Solve the dual to KKT violation below ``tol``.

    ``labels`` may hold any two distinct values; the lexicographically
    smaller one becomes the positive class. ``seed`` is part of the API
    for symmetry with the other trainers but the solver is deterministic.
    """
    del seed
    x = np.asarray(rows, dtype=float)
    labels = np.asarray(labels)
    classes = sorted(set(labels.tolist()))
    if len(classes) != 2:
        raise ValueError(f"exactly two classes required, got {classes}")
    y = np.where(labels == classes[0], 1.0, -1.0)
    g = resolve_gamma(x, gamma)
    k = _kernel_matrix(x, x, kernel, g)

    alpha, grad, residual = _smo(k, y, c, tol, max_updates)
    bias = _bias(alpha, grad, y, c)

    sv = alpha > 1e-12
    return SvmModel(support_vectors=x[sv], dual_coef=(alpha * y)[sv],
                    bias=bias, kernel=kernel, gamma=g, c=c,
                    classes=(classes[0], classes[1]), kkt_residual=residual)


def _smo(k: np.ndarray, y: np.ndarray, c: float, tol: float,
         max_updates: int):
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)          # gradient of 1/2 a'Qa - e'a at a = 0
    diag = np.diag(k).copy()
    yg = None
    for _ in range(max_updates):
        yg = -y * grad
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < c)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            return alpha, grad, 0.0
        i = np.flatnonzero(up)[np.argmax(yg[up])]
        m_val = yg[i]
        low_idx = np.flatnonzero(low)
        residual = m_val - yg[low_idx].min()
        if residual < tol:
            return alpha, grad, max(residual, 0.0)

        # Second-order choice of the partner index.
        cand = low_idx[yg[low_idx] < m_val]
        gain_num = (m_val - yg[cand]) ** 2
        curv = np.maximum(diag[i] + diag[cand] - 2.0 * k[i, cand], _TAU)
        j = cand[np.argmax(gain_num / curv)]

        a = max(diag[i] + diag[j] - 2.0 * k[i, j], _TAU)
        d = (m_val - yg[j]) / a
        # Box limits for the step alpha_i += y_i d, alpha_j -= y_j d.
        if y[i] > 0:
            d = min(d, c - alpha[i])
        else:
            d = min(d, alpha[i])
        if y[j] > 0:
            d = min(d, alpha[j])
        else:
            d = min(d, c - alpha[j])
        d = max(d, 0.0)

        dai = y[i] * d
        daj = -y[j] * d
        alpha[i] += dai
        alpha[j] += daj
        grad += (y * k[:, i]) * (y[i] * dai) + (y * k[:, j]) * (y[j] * daj)
    raise ConvergenceError(
        f"SMO did not reach tol={tol} within {max_updates} pair updates "
        f"(last KKT residual {m_val - yg[low_idx].min():.3e})")


def _bias(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray,
          c: float) -> float:
    yg = -y * grad
    free = (alpha > 1e-12) & (alpha < c - 1e-12)
    if free.any():
        return float(yg[free].mean())
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < c)) | ((y > 0) & (alpha > 0))
    hi = yg[up].max() if up.any() else 0.0
    lo = yg[low].min() if low.any() else 0.0
    return float((hi + lo) / 2.0)


def predict(model: SvmModel, rows: np.ndarray) -> np.ndarray:
    """Classify by decision-function side; exact zeros go to the positive class."""
    dec = model.decision_function(rows)
    return np.where(dec >= 0.0, model.classes[0], model.classes[1])


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.size == 0:
        raise ValueError("empty prediction set")
    if predicted.shape != truth.shape:
        raise ValueError("length mismatch between predictions and truth")
    return float(np.mean(predicted == truth))
