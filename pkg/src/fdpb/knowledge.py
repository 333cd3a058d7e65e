"""Knowledge extraction, server-side aggregation, and distribution of
distillation targets back to clients.

Knowledge travels as raw logits (not probabilities): the poisoning
transforms emit values such as -S that no softmax could produce, so raw
logits are the only representation every protocol can carry. Softening
happens inside the distillation loss.

Three aggregation protocols are supported:

- ``sample_avg``: arithmetic mean of all logits uploaded for the same
  sample id (literal knowledge averaging; degenerates to identity when
  shards are disjoint).
- ``label_avg``: per-class mean of uploaded logits; a client's target for
  a sample of class y is the class mean computed over the *other* clients'
  records (leave-one-out), so nobody distills toward their own upload.
- ``cache_lite``: per-sample store; a client's target for sample s is the
  mean of the R most similar other-client samples, where similarity is
  cosine over a fixed random projection of the raw features.

All accumulations run in ascending (client_id, sample_id) order so results
are bitwise reproducible regardless of upload order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import ConfigError, ProtocolError

PROTOCOLS = ("sample_avg", "label_avg", "cache_lite")

# Seed of the fixed random projection used by cache_lite sample encoding.
ENCODING_SEED = 16180
ENCODING_DIM = 16
DEFAULT_NEIGHBORS = 16


@dataclass
class KnowledgeRecord:
    """One client's logits for one sample; the unit of communication."""

    client_id: int
    sample_id: int
    logits: np.ndarray


@dataclass
class GlobalKnowledge:
    """Server-side state after one aggregation round."""

    protocol: str
    n_classes: int
    # sample_avg / cache_lite: sample_id -> mean logits.
    # label_avg: class -> mean logits over all contributing records.
    entries: dict[int, np.ndarray]
    client_sample_ids: dict[int, list[int]]
    # label_avg: class -> [(client_id, logits)] in ascending upload order.
    class_records: dict[int, list[tuple[int, np.ndarray]]] = field(default_factory=dict)
    sample_labels: dict[int, int] = field(default_factory=dict)
    # cache_lite: aligned arrays of contributor id / sample id / logits,
    # plus unit-norm sample encodings.
    cache_client_ids: np.ndarray | None = None
    cache_sample_ids: np.ndarray | None = None
    cache_logits: np.ndarray | None = None
    cache_encodings: np.ndarray | None = None
    neighbors: int = DEFAULT_NEIGHBORS


def extract_knowledge(
    client_id: int,
    params: nn.ModelParams,
    features: np.ndarray,
    sample_ids: np.ndarray,
) -> list[KnowledgeRecord]:
    """One record per local sample, logits straight from the forward pass."""
    logits = nn.forward_batch(params, features)
    return [
        KnowledgeRecord(client_id=client_id, sample_id=int(sid), logits=logits[i])
        for i, sid in enumerate(sample_ids)
    ]


def sample_encodings(features: np.ndarray, dim: int = ENCODING_DIM) -> np.ndarray:
    """Unit-norm random projection of raw features, one row per sample."""
    rng = np.random.default_rng(ENCODING_SEED)
    projection = rng.normal(size=(features.shape[1], dim))
    enc = np.asarray(features, dtype=np.float64) @ projection
    norms = np.linalg.norm(enc, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return enc / norms


def _sorted_records(records: list[KnowledgeRecord]) -> list[KnowledgeRecord]:
    return sorted(records, key=lambda r: (r.client_id, r.sample_id))


def _anchored_means(ordered: list[KnowledgeRecord]) -> dict[int, np.ndarray]:
    """Per-sample mean as first + sum(x - first)/count, folded in order.

    The anchored form keeps the mean of identical contributions exactly
    equal to that contribution.
    """
    first: dict[int, np.ndarray] = {}
    diff_sum: dict[int, np.ndarray] = {}
    count: dict[int, int] = {}
    for r in ordered:
        sid = r.sample_id
        if sid not in first:
            first[sid] = r.logits.astype(np.float64, copy=True)
            diff_sum[sid] = np.zeros_like(first[sid])
            count[sid] = 1
        else:
            diff_sum[sid] = diff_sum[sid] + (r.logits - first[sid])
            count[sid] += 1
    return {sid: first[sid] + diff_sum[sid] / count[sid] for sid in first}


def aggregate(
    records: list[KnowledgeRecord],
    protocol: str,
    n_classes: int,
    expected_clients: list[int],
    labels: np.ndarray | None = None,
    encodings: np.ndarray | None = None,
    neighbors: int = DEFAULT_NEIGHBORS,
) -> GlobalKnowledge:
    """Fold all clients' records into the round's global knowledge.

    Acts as the synchronization barrier: every client in expected_clients
    must have contributed at least one record.

    Args:
        records: every client's uploads for this round.
        protocol: one of PROTOCOLS.
        n_classes: logit vector length.
        expected_clients: ids that must appear among the records.
        labels: full label array indexed by sample_id (label_avg only).
        encodings: per-sample encoding rows indexed by sample_id
            (cache_lite only).
        neighbors: fetch size R for cache_lite targets.
    """
    if protocol not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {protocol!r}, expected one of {PROTOCOLS}")
    if not records:
        raise ProtocolError("no knowledge records received")
    seen = {r.client_id for r in records}
    missing = sorted(set(expected_clients) - seen)
    if missing:
        raise ProtocolError(f"barrier timeout: no records from clients {missing}")

    ordered = _sorted_records(records)
    stacked = np.stack([r.logits for r in ordered])
    if stacked.shape[1] != n_classes:
        raise ProtocolError(
            f"records carry {stacked.shape[1]} logits, expected {n_classes}"
        )
    if not np.isfinite(stacked).all():
        raise ProtocolError("records carry non-finite logits")

    client_sample_ids: dict[int, list[int]] = {}
    for r in ordered:
        client_sample_ids.setdefault(r.client_id, []).append(r.sample_id)

    gk = GlobalKnowledge(
        protocol=protocol,
        n_classes=n_classes,
        entries={},
        client_sample_ids=client_sample_ids,
        neighbors=neighbors,
    )

    if protocol == "sample_avg":
        gk.entries = _anchored_means(ordered)

    elif protocol == "label_avg":
        if labels is None:
            raise ConfigError("label_avg aggregation needs the sample labels")
        labels = np.asarray(labels, dtype=np.int64)
        class_records: dict[int, list[tuple[int, np.ndarray]]] = {}
        for r in ordered:
            y = int(labels[r.sample_id])
            class_records.setdefault(y, []).append((r.client_id, r.logits))
            gk.sample_labels[r.sample_id] = y
        gk.class_records = class_records
        for y, recs in class_records.items():
            total = recs[0][1].astype(np.float64, copy=True)
            for _, logits in recs[1:]:
                total = total + logits
            gk.entries[y] = total / len(recs)

    else:  # cache_lite
        if encodings is None:
            raise ConfigError("cache_lite aggregation needs sample encodings")
        gk.entries = _anchored_means(ordered)
        gk.cache_client_ids = np.asarray([r.client_id for r in ordered], dtype=np.int64)
        gk.cache_sample_ids = np.asarray([r.sample_id for r in ordered], dtype=np.int64)
        gk.cache_logits = stacked
        gk.cache_encodings = np.asarray(encodings, dtype=np.float64)

    return gk


def _label_avg_targets(gk: GlobalKnowledge, client_id: int) -> dict[int, np.ndarray]:
    targets: dict[int, np.ndarray] = {}
    loo_means: dict[int, np.ndarray | None] = {}
    for sid in gk.client_sample_ids[client_id]:
        y = gk.sample_labels[sid]
        if y not in loo_means:
            total = None
            count = 0
            for cid, logits in gk.class_records[y]:
                if cid == client_id:
                    continue
                total = logits.astype(np.float64, copy=True) if total is None else total + logits
                count += 1
            loo_means[y] = total / count if count else None
        mean = loo_means[y]
        if mean is not None:
            targets[sid] = mean
    return targets


def _cache_lite_targets(gk: GlobalKnowledge, client_id: int) -> dict[int, np.ndarray]:
    other = gk.cache_client_ids != client_id
    if not other.any():
        return {}
    other_sids = gk.cache_sample_ids[other]
    other_logits = gk.cache_logits[other]
    other_enc = gk.cache_encodings[other_sids]
    targets: dict[int, np.ndarray] = {}
    for sid in gk.client_sample_ids[client_id]:
        sims = other_enc @ gk.cache_encodings[sid]
        # Highest similarity first; equal similarities by lower sample id.
        order = np.lexsort((other_sids, -sims))[: gk.neighbors]
        total = other_logits[order[0]].astype(np.float64, copy=True)
        for row in order[1:]:
            total = total + other_logits[row]
        targets[sid] = total / len(order)
    return targets


def distribute(gk: GlobalKnowledge, client_id: int) -> dict[int, np.ndarray]:
    """Distillation targets for one client's samples under the active protocol.

    Returns a map sample_id -> target logits; samples with no admissible
    target (e.g. no other contributor for that class) are simply absent.
    """
    if client_id not in gk.client_sample_ids:
        raise ValueError(f"client {client_id} contributed no records this round")
    if gk.protocol == "sample_avg":
        return {sid: gk.entries[sid] for sid in gk.client_sample_ids[client_id]}
    if gk.protocol == "label_avg":
        return _label_avg_targets(gk, client_id)
    return _cache_lite_targets(gk, client_id)
