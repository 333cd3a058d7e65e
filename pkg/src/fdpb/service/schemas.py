"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .. import config as core_config
from ..attacks import AttackConfig
from ..nn import TrainConfig


class DatasetSpec(BaseModel):
    kind: Literal["blobs", "csv"] = "blobs"
    n_classes: int = 10
    samples_per_class: int = 200
    test_samples_per_class: int = 50
    dim: int = 32
    spread: float = 1.0
    path: Optional[str] = None
    test_path: Optional[str] = None


class PartitionSpecModel(BaseModel):
    n_clients: int = 10
    alpha: float = 1.0
    seed: Optional[int] = None


class TrainSpec(BaseModel):
    lr: float = 0.05
    beta: float = 1.0
    temperature: float = 1.0
    local_epochs: int = 1
    batch_size: int = 32


class ProtocolSpec(BaseModel):
    kind: Literal["label_avg", "sample_avg", "cache_lite"] = "label_avg"
    neighbors: int = 16


class AttackSpec(BaseModel):
    kind: Literal["none", "random", "zero", "fdla", "pcfdla"] = "none"
    peak: float = 5.0
    fraction: float = Field(default=0.0, ge=0.0, lt=1.0)
    rng_seed: Optional[int] = None
    literal_index: bool = False
    clean_local_distill: Optional[bool] = None


class ModelSpec(BaseModel):
    family: list[list[int]] = [[32], [64], [32, 16]]
    heterogeneous: bool = False


class RunRequest(BaseModel):
    dataset: DatasetSpec = DatasetSpec()
    partition: PartitionSpecModel = PartitionSpecModel()
    train: TrainSpec = TrainSpec()
    protocol: ProtocolSpec = ProtocolSpec()
    attack: AttackSpec = AttackSpec()
    model: ModelSpec = ModelSpec()
    rounds: int = Field(default=40, ge=1)
    master_seed: int = 0

    def to_config(self) -> core_config.ExperimentConfig:
        return core_config.ExperimentConfig(
            dataset=core_config.DatasetConfig(**self.dataset.model_dump()),
            partition=core_config.PartitionConfig(**self.partition.model_dump()),
            train=TrainConfig(**self.train.model_dump()),
            protocol=core_config.ProtocolConfig(**self.protocol.model_dump()),
            attack=AttackConfig(**self.attack.model_dump()),
            model=core_config.ModelConfig(
                family=tuple(tuple(arch) for arch in self.model.family),
                heterogeneous=self.model.heterogeneous,
            ),
            rounds=self.rounds,
            master_seed=self.master_seed,
        )


class RoundSummary(BaseModel):
    round: int
    tol_avg_acc: float
    vctm_avg_acc: float
    per_client_acc: list[float]
    misdirection_count: int


class PcaPoint(BaseModel):
    client_id: int
    role: str
    x: float
    y: float


class RunResponse(BaseModel):
    rounds: list[RoundSummary]
    roles: list[str]
    final_tol_avg_acc: float
    final_vctm_avg_acc: float
    misdirection_pair: tuple[int, int]
    pca: list[PcaPoint]


class AttackPreviewRequest(BaseModel):
    kind: Literal["none", "random", "zero", "fdla", "pcfdla"]
    logits: list[float] = Field(min_length=1)
    peak: float = 5.0
    literal_index: bool = False
    seed: int = 0


class AttackPreviewResponse(BaseModel):
    logits: list[float]


class PartitionPreviewRequest(BaseModel):
    labels: list[int] = Field(min_length=1)
    n_clients: int = Field(default=10, ge=1)
    alpha: float = Field(default=1.0, gt=0.0)
    seed: int = 0


class PartitionPreviewResponse(BaseModel):
    shards: list[list[int]]
    class_counts: list[list[int]]


class HealthResponse(BaseModel):
    status: str
    version: str
