"""Logits-poisoning strategies applied to a malicious client's uploads.

Four strategies are implemented on top of a no-op kind:

- ``random``: replace every logit with an independent uniform draw in [0, 1).
- ``zero``: replace every logit with zero.
- ``fdla``: permute the confidence values down the rank order, so the
  position of the old maximum receives the old minimum and every other
  rank position inherits the value one rank above it; the runner-up class
  becomes the apparent winner.
- ``pcfdla``: overwrite the vector with a preset peak +S at the runner-up
  class and -S everywhere else, making the misleading class maximally
  confident while flatly denying all others, including the true winner.

Transforms operate on the upload copy only; the caller's records are never
mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .knowledge import KnowledgeRecord

ATTACK_KINDS = ("none", "random", "zero", "fdla", "pcfdla")


@dataclass
class AttackConfig:
    """Attack kind plus its knobs.

    peak is the +/-S magnitude used by pcfdla. literal_index switches
    pcfdla from "peak at the runner-up class" to "peak at vector position 2"
    (a deliberately naive variant kept for comparison). clean_local_distill
    makes the attacker distill toward its own clean logits instead of the
    polluted global knowledge; when left unset it defaults to True for
    pcfdla and False otherwise.
    """

    kind: str = "none"
    peak: float = 5.0
    fraction: float = 0.0
    rng_seed: int | None = None
    literal_index: bool = False
    clean_local_distill: bool | None = None

    def resolved_clean_local_distill(self) -> bool:
        if self.clean_local_distill is None:
            return self.kind == "pcfdla"
        return self.clean_local_distill

    def validate(self) -> None:
        if self.kind not in ATTACK_KINDS:
            raise ConfigError(
                f"unknown attack kind {self.kind!r}, expected one of {ATTACK_KINDS}"
            )
        if self.kind == "pcfdla" and self.peak <= 0:
            raise ConfigError(f"attack.peak must be positive, got {self.peak}")
        if not 0.0 <= self.fraction < 1.0:
            raise ConfigError(
                f"attack.fraction must lie in [0, 1), got {self.fraction}"
            )


def _rank_order(c: np.ndarray) -> np.ndarray:
    """Indices by descending confidence; ties broken by lower index."""
    return np.argsort(-c, kind="stable")


def random_poison(c: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform [0, 1) replacement of every entry."""
    return rng.random(len(c))


def zero_poison(c: np.ndarray) -> np.ndarray:
    """All-zero vector of the same length."""
    return np.zeros(len(c))


def fdla_transform(c: np.ndarray) -> np.ndarray:
    """Shift confidence values one step down the rank order.

    The position holding the maximum receives the minimum's value; the
    position holding rank k (k >= 2) receives the rank k-1 value. The value
    multiset is preserved and the new argmax sits at the old runner-up.
    """
    c = np.asarray(c, dtype=np.float64)
    if len(c) < 2:
        raise ConfigError(f"need at least 2 classes, got {len(c)}")
    order = _rank_order(c)
    out = np.empty_like(c)
    out[order[0]] = c[order[-1]]
    out[order[1:]] = c[order[:-1]]
    return out


def pcfdla_transform(
    c: np.ndarray, peak: float, literal_index: bool = False
) -> np.ndarray:
    """Peak-controlled overwrite: +peak at the runner-up class, -peak elsewhere.

    With literal_index=True the peak lands at vector position 2 (index 1)
    regardless of the confidence ranking.
    """
    c = np.asarray(c, dtype=np.float64)
    if len(c) < 2:
        raise ConfigError(f"need at least 2 classes, got {len(c)}")
    if peak <= 0:
        raise ConfigError(f"peak must be positive, got {peak}")
    target = 1 if literal_index else int(_rank_order(c)[1])
    out = np.full(len(c), -peak)
    out[target] = peak
    return out


def apply_attack(
    records: list[KnowledgeRecord],
    cfg: AttackConfig,
    rng: np.random.Generator | None = None,
) -> list[KnowledgeRecord]:
    """Per-kind transform of every record's logits on a fresh upload copy.

    kind "none" returns the input list unchanged. The originals are never
    modified; ids are preserved.
    """
    cfg.validate()
    if cfg.kind == "none":
        return records
    if cfg.kind == "random" and rng is None:
        raise ConfigError("random poisoning needs an RNG stream")
    out = []
    for r in records:
        if cfg.kind == "random":
            logits = random_poison(r.logits, rng)
        elif cfg.kind == "zero":
            logits = zero_poison(r.logits)
        elif cfg.kind == "fdla":
            logits = fdla_transform(r.logits)
        else:
            logits = pcfdla_transform(r.logits, cfg.peak, cfg.literal_index)
        out.append(
            KnowledgeRecord(client_id=r.client_id, sample_id=r.sample_id, logits=logits)
        )
    return out
