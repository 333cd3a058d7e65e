"""fdpb: a deterministic federated-distillation simulator with
logits-poisoning attacks and victim-oriented evaluation metrics.
"""

__version__ = "0.1.0"

from .attacks import (
    AttackConfig,
    apply_attack,
    fdla_transform,
    pcfdla_transform,
    random_poison,
    zero_poison,
)
from .config import ExperimentConfig, parse_config
from .data import Dataset, PartitionSpec, dirichlet_partition, gen_blobs, load_dataset
from .knowledge import GlobalKnowledge, KnowledgeRecord, aggregate, distribute
from .metrics import RoundReport, accuracy, pca_project, tol_avg_acc, vctm_avg_acc
from .nn import ModelParams, TrainConfig, forward, kd_loss, softmax
from .sim import ExperimentResult, build_experiment, run_experiment, run_round

__all__ = [
    "AttackConfig",
    "Dataset",
    "ExperimentConfig",
    "ExperimentResult",
    "GlobalKnowledge",
    "KnowledgeRecord",
    "ModelParams",
    "PartitionSpec",
    "RoundReport",
    "TrainConfig",
    "accuracy",
    "aggregate",
    "apply_attack",
    "build_experiment",
    "dirichlet_partition",
    "distribute",
    "fdla_transform",
    "forward",
    "gen_blobs",
    "kd_loss",
    "load_dataset",
    "parse_config",
    "pca_project",
    "pcfdla_transform",
    "random_poison",
    "run_experiment",
    "run_round",
    "softmax",
    "tol_avg_acc",
    "vctm_avg_acc",
    "zero_poison",
]
