"""Synthetic dataset generation, CSV load/save, and Dirichlet non-i.i.d.
partitioning of samples across clients.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError

# Re-draws allowed before giving up on a partition with an empty shard.
MAX_PARTITION_RETRIES = 100


@dataclass
class Dataset:
    """Feature matrix (n, d), integer labels (n,), and the class count."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __len__(self) -> int:
        return len(self.labels)

    def validate(self) -> None:
        if len(self.features) != len(self.labels):
            raise ConfigError(
                f"{len(self.features)} feature rows but {len(self.labels)} labels"
            )
        if self.n_classes < 1:
            raise ConfigError(f"n_classes must be positive, got {self.n_classes}")
        if len(self.labels) and (
            self.labels.min() < 0 or self.labels.max() >= self.n_classes
        ):
            raise ConfigError("labels must lie in [0, n_classes)")


@dataclass
class PartitionSpec:
    """Client count, Dirichlet concentration, and the partition seed."""

    n_clients: int
    alpha: float
    seed: int

    def validate(self) -> None:
        if self.n_clients < 1:
            raise ConfigError(f"n_clients must be >= 1, got {self.n_clients}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")


def gen_blobs(
    n_classes: int,
    samples_per_class: int,
    dim: int,
    spread: float,
    seed: int,
) -> Dataset:
    """Balanced Gaussian clusters, one per class.

    Class centers are standard-normal draws from `seed`; samples scatter
    around their center with per-coordinate std `spread`.
    """
    if n_classes < 1 or samples_per_class < 1 or dim < 1:
        raise ConfigError("n_classes, samples_per_class and dim must be positive")
    if spread <= 0:
        raise ConfigError(f"spread must be positive, got {spread}")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 1.0, size=(n_classes, dim))
    features = np.empty((n_classes * samples_per_class, dim))
    labels = np.empty(n_classes * samples_per_class, dtype=np.int64)
    for c in range(n_classes):
        lo = c * samples_per_class
        hi = lo + samples_per_class
        features[lo:hi] = centers[c] + spread * rng.normal(
            size=(samples_per_class, dim)
        )
        labels[lo:hi] = c
    return Dataset(features=features, labels=labels, n_classes=n_classes)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the CSV schema `label,f0,...,f{d-1}`, one sample per row."""
    dim = dataset.features.shape[1]
    header = "label," + ",".join(f"f{i}" for i in range(dim))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for label, row in zip(dataset.labels, dataset.features):
            fh.write(f"{int(label)}," + ",".join(repr(float(v)) for v in row) + "\n")


def load_dataset(path: str | Path) -> Dataset:
    """Parse the CSV schema written by save_dataset.

    The class count is inferred as 1 + max label. Malformed rows raise
    ParseError naming the offending line.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: file is empty")
    header = lines[0].split(",")
    if header[0] != "label":
        raise ParseError(f"{path}:1: header must start with 'label'")
    dim = len(header) - 1
    if dim < 1:
        raise ParseError(f"{path}:1: header declares no feature columns")

    features, labels = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != dim + 1:
            raise ParseError(
                f"{path}:{lineno}: expected {dim + 1} fields, got {len(parts)}"
            )
        try:
            label = int(parts[0])
            row = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
        if label < 0:
            raise ParseError(f"{path}:{lineno}: label must be non-negative")
        labels.append(label)
        features.append(row)
    if not labels:
        raise ParseError(f"{path}: no sample rows")

    dataset = Dataset(
        features=np.asarray(features, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        n_classes=int(max(labels)) + 1,
    )
    dataset.validate()
    return dataset


def _draw_partition(
    labels: np.ndarray, n_clients: int, alpha: float, seed: int
) -> list[np.ndarray]:
    """One Dirichlet draw: per-class proportions, then multinomial counts."""
    rng = np.random.default_rng(seed)
    shards: list[list[int]] = [[] for _ in range(n_clients)]
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        proportions = rng.dirichlet(np.full(n_clients, alpha))
        counts = rng.multinomial(len(idx), proportions)
        start = 0
        for k, count in enumerate(counts):
            shards[k].extend(idx[start : start + count].tolist())
            start += count
    return [np.sort(np.asarray(s, dtype=np.int64)) for s in shards]


def dirichlet_partition(labels: np.ndarray, spec: PartitionSpec) -> list[np.ndarray]:
    """Split sample indices into n_clients disjoint, exhaustive shards.

    Per-class client proportions follow Dirichlet(alpha, ..., alpha). A draw
    that leaves any client empty is retried with seed+1, up to
    MAX_PARTITION_RETRIES times.
    """
    spec.validate()
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise ConfigError("labels must be non-empty")
    if spec.n_clients > len(labels):
        raise ConfigError(
            f"cannot split {len(labels)} samples across {spec.n_clients} clients"
        )
    for attempt in range(MAX_PARTITION_RETRIES):
        shards = _draw_partition(labels, spec.n_clients, spec.alpha, spec.seed + attempt)
        if all(len(s) > 0 for s in shards):
            return shards
    raise ConfigError(
        f"no non-empty partition found in {MAX_PARTITION_RETRIES} attempts "
        f"(n_clients={spec.n_clients}, alpha={spec.alpha})"
    )
