"""Shared helpers for the fdpb test suite."""

from __future__ import annotations

import numpy as np
import pytest

from fdpb.attacks import AttackConfig
from fdpb.config import DatasetConfig, ExperimentConfig, PartitionConfig
from fdpb.nn import TrainConfig


def tiny_config(
    kind: str = "none",
    fraction: float = 0.0,
    seed: int = 7,
    rounds: int = 3,
    n_clients: int = 4,
    peak: float = 5.0,
) -> ExperimentConfig:
    """A seconds-scale experiment config for orchestration tests."""
    cfg = ExperimentConfig()
    cfg.dataset = DatasetConfig(
        kind="blobs",
        n_classes=4,
        samples_per_class=30,
        test_samples_per_class=10,
        dim=8,
        spread=0.8,
    )
    cfg.partition = PartitionConfig(n_clients=n_clients, alpha=1.0)
    cfg.train = TrainConfig(lr=0.05, beta=1.0, temperature=1.0, local_epochs=1, batch_size=16)
    cfg.attack = AttackConfig(kind=kind, fraction=fraction, peak=peak)
    cfg.rounds = rounds
    cfg.master_seed = seed
    return cfg


TINY_CONFIG_INI = """\
[dataset]
kind = blobs
n_classes = 4
samples_per_class = 30
test_samples_per_class = 10
dim = 8
spread = 0.8

[partition]
n_clients = 4
alpha = 1.0

[train]
lr = 0.05
beta = 1.0
batch_size = 16

[attack]
kind = {kind}
fraction = {fraction}

[run]
rounds = {rounds}
master_seed = {seed}
"""


@pytest.fixture
def tiny_config_file(tmp_path):
    """Write a small run config and return its path."""

    def _write(kind="none", fraction=0.0, rounds=3, seed=7, extra=""):
        path = tmp_path / "config.ini"
        text = TINY_CONFIG_INI.format(
            kind=kind, fraction=fraction, rounds=rounds, seed=seed
        )
        path.write_text(text + extra, encoding="utf-8")
        return path

    return _write


def params_equal(a, b) -> bool:
    """Bitwise equality of two ModelParams."""
    if a.layer_dims != b.layer_dims:
        return False
    return all(
        np.array_equal(wa, wb) for wa, wb in zip(a.weights, b.weights)
    ) and all(np.array_equal(ba, bb) for ba, bb in zip(a.biases, b.biases))
