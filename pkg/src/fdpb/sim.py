"""Round orchestration: build clients from a config, then iterate
train -> extract -> poison -> aggregate -> distribute -> evaluate.

The whole run is a pure function of the ExperimentConfig: every RNG stream
is derived from the master seed with a fixed label, and clients execute in
ascending id order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import attacks, knowledge, metrics, nn
from .config import ExperimentConfig
from .data import Dataset, PartitionSpec, dirichlet_partition, gen_blobs, load_dataset
from .errors import ConfigError
from .rng import derive_seed, substream

PROBE_SIZE = 64


@dataclass
class ClientState:
    """One simulated participant: model, shard, role, and RNG streams."""

    id: int
    params: nn.ModelParams
    shard: np.ndarray
    role: str  # "honest" | "malicious"
    attack: attacks.AttackConfig
    rng: np.random.Generator
    attack_rng: np.random.Generator | None = None
    # Own clean logits from the latest extraction; the distillation target
    # of attackers that keep their local training unpolluted.
    clean_targets: dict[int, np.ndarray] = field(default_factory=dict)


@dataclass
class Experiment:
    """Built simulation state, ready for run_round calls."""

    cfg: ExperimentConfig
    clients: list[ClientState]
    train: Dataset
    test: Dataset
    probe_ids: np.ndarray
    encodings: np.ndarray | None


@dataclass
class ExperimentResult:
    """Everything a run produces, ready for CSV emission or inspection."""

    reports: list[metrics.RoundReport]
    roles: list[str]
    pca_points: np.ndarray
    misdirection_pair: tuple[int, int]
    misdirection_counts: list[int]
    final_params: list[nn.ModelParams]
    knowledge_rows: list[tuple[int, int, int, np.ndarray]] | None = None


def malicious_count(fraction: float, n_clients: int) -> int:
    """floor(fraction * K), robust to decimal fractions stored in binary."""
    return int(math.floor(fraction * n_clients + 1e-9))


def _build_datasets(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    d = cfg.dataset
    if d.kind == "blobs":
        per_class = d.samples_per_class + d.test_samples_per_class
        combined = gen_blobs(
            n_classes=d.n_classes,
            samples_per_class=per_class,
            dim=d.dim,
            spread=d.spread,
            seed=derive_seed(cfg.master_seed, "data"),
        )
        train_idx, test_idx = [], []
        for c in range(d.n_classes):
            start = c * per_class
            train_idx.extend(range(start, start + d.samples_per_class))
            test_idx.extend(range(start + d.samples_per_class, start + per_class))
        train = Dataset(
            features=combined.features[train_idx],
            labels=combined.labels[train_idx],
            n_classes=d.n_classes,
        )
        test = Dataset(
            features=combined.features[test_idx],
            labels=combined.labels[test_idx],
            n_classes=d.n_classes,
        )
        return train, test

    train = load_dataset(d.path)
    test = load_dataset(d.test_path)
    if train.features.shape[1] != test.features.shape[1]:
        raise ConfigError(
            "train and test CSV files disagree on the feature dimension"
        )
    n_classes = max(train.n_classes, test.n_classes)
    train.n_classes = n_classes
    test.n_classes = n_classes
    return train, test


def build_experiment(cfg: ExperimentConfig) -> Experiment:
    """Construct clients, shards, roles and RNG streams from the config.

    Roles: when the attack kind is active and fraction > 0, the
    floor(fraction * K) lowest-indexed clients are malicious.
    """
    cfg.validate()
    train, test = _build_datasets(cfg)

    spec = PartitionSpec(
        n_clients=cfg.partition.n_clients,
        alpha=cfg.partition.alpha,
        seed=(
            cfg.partition.seed
            if cfg.partition.seed is not None
            else derive_seed(cfg.master_seed, "partition")
        ),
    )
    shards = dirichlet_partition(train.labels, spec)

    n_malicious = 0
    if cfg.attack.kind != "none" and cfg.attack.fraction > 0.0:
        n_malicious = malicious_count(cfg.attack.fraction, cfg.partition.n_clients)
    attack_base = (
        cfg.attack.rng_seed
        if cfg.attack.rng_seed is not None
        else derive_seed(cfg.master_seed, "attack")
    )

    input_dim = train.features.shape[1]
    clients = []
    for i in range(cfg.partition.n_clients):
        malicious = i < n_malicious
        dims = (input_dim, *cfg.model.hidden_dims(i), train.n_classes)
        clients.append(
            ClientState(
                id=i,
                params=nn.init_params(dims, substream(cfg.master_seed, "init", i)),
                shard=shards[i],
                role="malicious" if malicious else "honest",
                attack=cfg.attack if malicious else attacks.AttackConfig(kind="none"),
                rng=substream(cfg.master_seed, "train", i),
                attack_rng=substream(attack_base, "client", i) if malicious else None,
            )
        )

    probe_rng = substream(cfg.master_seed, "probe")
    probe_ids = np.sort(
        probe_rng.choice(len(test), size=min(PROBE_SIZE, len(test)), replace=False)
    )
    encodings = (
        knowledge.sample_encodings(train.features)
        if cfg.protocol.kind == "cache_lite"
        else None
    )
    return Experiment(
        cfg=cfg,
        clients=clients,
        train=train,
        test=test,
        probe_ids=probe_ids,
        encodings=encodings,
    )


def run_round(
    exp: Experiment,
    distributed: dict[int, dict[int, np.ndarray]] | None,
    round_idx: int,
) -> tuple[
    metrics.RoundReport,
    dict[int, dict[int, np.ndarray]],
    list[knowledge.KnowledgeRecord],
]:
    """One communication round.

    Order: local training against the previous round's distributed
    knowledge, extraction, poisoning of the upload copies, barrier
    aggregation, distribution, evaluation on the shared test set.

    Returns the round report, the freshly distributed per-client targets,
    and the (post-attack) uploads of this round.
    """
    cfg = exp.cfg
    train = exp.train

    for c in exp.clients:
        if distributed is None:
            targets: dict[int, np.ndarray] = {}
        elif c.role == "malicious" and c.attack.resolved_clean_local_distill():
            targets = c.clean_targets
        else:
            targets = distributed.get(c.id, {})
        c.params = nn.train_local(
            c.params,
            train.features[c.shard],
            train.labels[c.shard],
            c.shard,
            targets,
            cfg.train,
            c.rng,
        )

    uploads: list[knowledge.KnowledgeRecord] = []
    for c in exp.clients:
        records = knowledge.extract_knowledge(
            c.id, c.params, train.features[c.shard], c.shard
        )
        if c.role == "malicious":
            if c.attack.resolved_clean_local_distill():
                c.clean_targets = {r.sample_id: r.logits for r in records}
            records = attacks.apply_attack(records, c.attack, c.attack_rng)
        uploads.extend(records)

    gk = knowledge.aggregate(
        uploads,
        protocol=cfg.protocol.kind,
        n_classes=train.n_classes,
        expected_clients=[c.id for c in exp.clients],
        labels=train.labels,
        encodings=exp.encodings,
        neighbors=cfg.protocol.neighbors,
    )
    fresh = {c.id: knowledge.distribute(gk, c.id) for c in exp.clients}

    accs = np.empty(len(exp.clients))
    honest = np.empty(len(exp.clients), dtype=bool)
    confusion = np.zeros((exp.test.n_classes, exp.test.n_classes), dtype=np.int64)
    for i, c in enumerate(exp.clients):
        preds = metrics.predictions(c.params, exp.test)
        accs[i] = float(np.mean(preds == exp.test.labels))
        honest[i] = c.role == "honest"
        confusion += metrics.confusion_matrix(preds, exp.test.labels, exp.test.n_classes)

    report = metrics.RoundReport(
        round=round_idx,
        per_client_acc=accs,
        honest_mask=honest,
        tol_avg_acc=metrics.tol_avg_acc(accs),
        vctm_avg_acc=metrics.vctm_avg_acc(accs, honest),
        confusion=confusion,
    )
    return report, fresh, uploads


def _probe_upload_vectors(exp: Experiment) -> np.ndarray:
    """What the server would see from each client on the probe samples.

    Malicious clients poison these logits exactly as they poison uploads;
    the concatenated rows are the PCA input, comparable across
    architectures.
    """
    features = exp.test.features[exp.probe_ids]
    vectors = []
    for c in exp.clients:
        logits = nn.forward_batch(c.params, features)
        if c.role == "malicious" and c.attack.kind != "none":
            probe_rng = substream(
                c.attack.rng_seed
                if c.attack.rng_seed is not None
                else derive_seed(exp.cfg.master_seed, "attack"),
                "probe",
                c.id,
            )
            rows = [
                knowledge.KnowledgeRecord(c.id, int(sid), logits[i])
                for i, sid in enumerate(exp.probe_ids)
            ]
            rows = attacks.apply_attack(rows, c.attack, probe_rng)
            logits = np.stack([r.logits for r in rows])
        vectors.append(logits.ravel())
    return np.stack(vectors)


def _misdirection_pair(final_confusion: np.ndarray) -> tuple[int, int]:
    """The most-confused (true, predicted) off-diagonal cell."""
    masked = final_confusion.copy()
    np.fill_diagonal(masked, -1)
    flat = int(np.argmax(masked))
    n = final_confusion.shape[0]
    return flat // n, flat % n


def run_experiment(
    cfg: ExperimentConfig, dump_knowledge: bool = False
) -> ExperimentResult:
    """Run all configured rounds and collect reports plus artifacts."""
    exp = build_experiment(cfg)
    reports: list[metrics.RoundReport] = []
    knowledge_rows: list[tuple[int, int, int, np.ndarray]] | None = (
        [] if dump_knowledge else None
    )
    distributed: dict[int, dict[int, np.ndarray]] | None = None
    for round_idx in range(1, cfg.rounds + 1):
        report, distributed, uploads = run_round(exp, distributed, round_idx)
        reports.append(report)
        if knowledge_rows is not None:
            knowledge_rows.extend(
                (round_idx, r.client_id, r.sample_id, r.logits) for r in uploads
            )

    pair = _misdirection_pair(reports[-1].confusion)
    counts = [metrics.misdirection_count(r.confusion, *pair) for r in reports]
    return ExperimentResult(
        reports=reports,
        roles=[c.role for c in exp.clients],
        pca_points=metrics.pca_project(_probe_upload_vectors(exp)),
        misdirection_pair=pair,
        misdirection_counts=counts,
        final_params=[c.params for c in exp.clients],
        knowledge_rows=knowledge_rows,
    )
