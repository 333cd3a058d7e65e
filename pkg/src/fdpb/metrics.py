"""Accuracy metrics over all clients and over victims, confusion counting,
and the 2-D PCA projection used for the stealth analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .data import Dataset

# Components whose variance falls below this fraction of the leading one
# are treated as numerically zero and projected to the origin.
PCA_EIGENVALUE_CUTOFF = 1e-9


@dataclass
class RoundReport:
    """Per-round evaluation snapshot across all clients.

    confusion aggregates every client's predictions on the shared test set
    (rows = true class, columns = predicted class), so each row sums to
    n_clients times the test count of that class.
    """

    round: int
    per_client_acc: np.ndarray
    honest_mask: np.ndarray
    tol_avg_acc: float
    vctm_avg_acc: float
    confusion: np.ndarray


def predictions(params: nn.ModelParams, test: Dataset) -> np.ndarray:
    """Predicted class per test sample; argmax ties go to the lowest index."""
    if len(test) == 0:
        raise ValueError("test set is empty")
    return np.argmax(nn.forward_batch(params, test.features), axis=1)


def accuracy(params: nn.ModelParams, test: Dataset) -> float:
    """Fraction of test samples whose argmax logit matches the label."""
    return float(np.mean(predictions(params, test) == test.labels))


def confusion_matrix(preds: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (labels, preds), 1)
    return counts


def tol_avg_acc(accs: np.ndarray) -> float:
    """Arithmetic mean accuracy over every client."""
    accs = np.asarray(accs, dtype=np.float64)
    if len(accs) == 0:
        raise ValueError("need at least one client accuracy")
    return float(accs.sum() / len(accs))


def vctm_avg_acc(accs: np.ndarray, honest_mask: np.ndarray) -> float:
    """Mean accuracy over honest (victim) clients only."""
    accs = np.asarray(accs, dtype=np.float64)
    honest_mask = np.asarray(honest_mask, dtype=bool)
    if len(accs) != len(honest_mask):
        raise ValueError("accuracy vector and honest mask lengths differ")
    if not honest_mask.any():
        raise ValueError("no honest clients: victim accuracy is undefined")
    picked = accs[honest_mask]
    return float(picked.sum() / len(picked))


def misdirection_count(confusion: np.ndarray, true_class: int, decoy_class: int) -> int:
    """How many true_class samples were predicted as decoy_class."""
    n = confusion.shape[0]
    if not (0 <= true_class < n and 0 <= decoy_class < n):
        raise IndexError(f"class pair ({true_class}, {decoy_class}) out of range for {n} classes")
    return int(confusion[true_class, decoy_class])


def runner_up_counts(
    params_list: list[nn.ModelParams], test: Dataset, true_class: int
) -> np.ndarray:
    """Per-class counts of second-place predictions on true_class samples.

    Aggregated over the given models; used to locate the modal decoy class
    an attack would steer samples toward.
    """
    sel = test.labels == true_class
    counts = np.zeros(test.n_classes, dtype=np.int64)
    if not sel.any():
        return counts
    features = test.features[sel]
    for params in params_list:
        logits = nn.forward_batch(params, features)
        top = np.argmax(logits, axis=1)
        logits[np.arange(len(logits)), top] = -np.inf
        second = np.argmax(logits, axis=1)
        counts += np.bincount(second, minlength=test.n_classes)
    return counts


def _jacobi_eigh(a: np.ndarray, max_sweeps: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi
    rotations. Adequate for the small matrices this module produces.
    """
    a = np.asarray(a, dtype=np.float64).copy()
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.array([a[0, 0]]), v
    scale = max(float(np.abs(a).max()), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    return np.diag(a).copy(), v


def pca_project(vectors: np.ndarray, dims: int = 2) -> np.ndarray:
    """Mean-centered projection onto the top principal directions.

    Components are ordered by descending variance and sign-fixed so each
    component's largest-magnitude loading is positive. Directions whose
    variance is numerically zero map to the zero coordinate. The
    eigendecomposition runs on whichever of the covariance or Gram matrix
    is smaller; nonzero eigenpairs of the two coincide.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 equal-length vectors")
    n, d = x.shape
    if d < dims:
        raise ValueError(f"vector length {d} is below the requested {dims} dimensions")
    centered = x - x.mean(axis=0)

    components: list[np.ndarray] = []
    if d <= n:
        cov = centered.T @ centered / (n - 1)
        evals, evecs = _jacobi_eigh(cov)
        order = np.argsort(-evals, kind="stable")
        cutoff = PCA_EIGENVALUE_CUTOFF * max(float(evals.max(initial=0.0)), 0.0)
        for j in order[:dims]:
            if evals[j] <= cutoff or evals[j] <= 0.0:
                components.append(np.zeros(d))
            else:
                components.append(evecs[:, j])
    else:
        gram = centered @ centered.T / (n - 1)
        evals, evecs = _jacobi_eigh(gram)
        order = np.argsort(-evals, kind="stable")
        cutoff = PCA_EIGENVALUE_CUTOFF * max(float(evals.max(initial=0.0)), 0.0)
        for j in order[:dims]:
            if evals[j] <= cutoff or evals[j] <= 0.0:
                components.append(np.zeros(d))
                continue
            direction = centered.T @ evecs[:, j]
            norm = np.linalg.norm(direction)
            components.append(direction / norm if norm > 0 else np.zeros(d))

    fixed = []
    for comp in components:
        lead = int(np.argmax(np.abs(comp)))
        fixed.append(-comp if comp[lead] < 0 else comp)
    return centered @ np.stack(fixed, axis=1)
