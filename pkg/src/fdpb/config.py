"""Experiment configuration: dataclasses, INI parsing with strict key
checking, defaults, and round-trippable emission.
"""

from __future__ import annotations

import configparser
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .attacks import ATTACK_KINDS, AttackConfig
from .errors import ConfigError, ParseError
from .knowledge import DEFAULT_NEIGHBORS, PROTOCOLS
from .nn import TrainConfig

log = logging.getLogger("fdpb")

DEFAULT_FAMILY: tuple[tuple[int, ...], ...] = ((32,), (64,), (32, 16))

SWEEP_AXES = ("fraction", "alpha", "clients", "peak", "heterogeneous")

DEFAULT_METHODS = ("none", "random", "zero", "fdla", "pcfdla")


@dataclass
class DatasetConfig:
    """Where samples come from: generated blobs or a CSV pair."""

    kind: str = "blobs"
    n_classes: int = 10
    samples_per_class: int = 200
    test_samples_per_class: int = 50
    dim: int = 32
    spread: float = 1.0
    path: str | None = None
    test_path: str | None = None

    def validate(self) -> None:
        if self.kind not in ("blobs", "csv"):
            raise ConfigError(f"dataset.kind must be 'blobs' or 'csv', got {self.kind!r}")
        if self.kind == "blobs":
            if self.n_classes < 2:
                raise ConfigError(f"dataset.n_classes must be >= 2, got {self.n_classes}")
            for key in ("samples_per_class", "test_samples_per_class", "dim"):
                if getattr(self, key) < 1:
                    raise ConfigError(f"dataset.{key} must be positive")
            if self.spread <= 0:
                raise ConfigError(f"dataset.spread must be positive, got {self.spread}")
        else:
            if not self.path:
                raise ConfigError("dataset.path is required when dataset.kind = csv")
            if not self.test_path:
                raise ConfigError("dataset.test_path is required when dataset.kind = csv")


@dataclass
class PartitionConfig:
    n_clients: int = 10
    alpha: float = 1.0
    seed: int | None = None

    def validate(self) -> None:
        if self.n_clients < 1:
            raise ConfigError(f"partition.n_clients must be >= 1, got {self.n_clients}")
        if self.alpha <= 0:
            raise ConfigError(f"partition.alpha must be positive, got {self.alpha}")


@dataclass
class ProtocolConfig:
    kind: str = "label_avg"
    neighbors: int = DEFAULT_NEIGHBORS

    def validate(self) -> None:
        if self.kind not in PROTOCOLS:
            raise ConfigError(
                f"protocol.kind must be one of {PROTOCOLS}, got {self.kind!r}"
            )
        if self.neighbors < 1:
            raise ConfigError(f"protocol.neighbors must be >= 1, got {self.neighbors}")


@dataclass
class ModelConfig:
    """MLP family: each entry is the hidden-layer widths of one variant.

    Homogeneous runs use family[0]; heterogeneous runs assign variant
    i mod len(family) to client i.
    """

    family: tuple[tuple[int, ...], ...] = DEFAULT_FAMILY
    heterogeneous: bool = False

    def validate(self) -> None:
        if not self.family:
            raise ConfigError("model.family must list at least one architecture")
        for arch in self.family:
            if any(width < 1 for width in arch):
                raise ConfigError(f"model.family holds a non-positive width: {arch}")

    def hidden_dims(self, client_id: int) -> tuple[int, ...]:
        if self.heterogeneous:
            return self.family[client_id % len(self.family)]
        return self.family[0]


@dataclass
class ExperimentConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    rounds: int = 40
    master_seed: int = 0

    def validate(self) -> None:
        self.dataset.validate()
        self.partition.validate()
        self.train.validate()
        self.protocol.validate()
        self.attack.validate()
        self.model.validate()
        if self.rounds < 1:
            raise ConfigError(f"run.rounds must be >= 1, got {self.rounds}")


@dataclass
class SweepConfig:
    axis: str
    values: tuple[object, ...]
    methods: tuple[str, ...]


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def _parse_family(raw: str, key: str) -> tuple[tuple[int, ...], ...]:
    """'32 | 64 | 32,16' -> ((32,), (64,), (32, 16))."""
    variants = []
    for chunk in raw.split("|"):
        chunk = chunk.strip()
        if not chunk:
            raise ConfigError(f"{key}: empty architecture entry")
        variants.append(tuple(_parse_int(part, key) for part in chunk.split(",")))
    return tuple(variants)


# section -> key -> (target attribute, parser). Parser None keeps the string.
_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "dataset": {
        "kind": ("kind", None),
        "n_classes": ("n_classes", _parse_int),
        "samples_per_class": ("samples_per_class", _parse_int),
        "test_samples_per_class": ("test_samples_per_class", _parse_int),
        "dim": ("dim", _parse_int),
        "spread": ("spread", _parse_float),
        "path": ("path", None),
        "test_path": ("test_path", None),
    },
    "partition": {
        "n_clients": ("n_clients", _parse_int),
        "alpha": ("alpha", _parse_float),
        "seed": ("seed", _parse_int),
    },
    "train": {
        "lr": ("lr", _parse_float),
        "beta": ("beta", _parse_float),
        "temperature": ("temperature", _parse_float),
        "local_epochs": ("local_epochs", _parse_int),
        "batch_size": ("batch_size", _parse_int),
    },
    "protocol": {
        "kind": ("kind", None),
        "neighbors": ("neighbors", _parse_int),
    },
    "attack": {
        "kind": ("kind", None),
        "peak": ("peak", _parse_float),
        "fraction": ("fraction", _parse_float),
        "rng_seed": ("rng_seed", _parse_int),
        "literal_index": ("literal_index", _parse_bool),
        "clean_local_distill": ("clean_local_distill", _parse_bool),
    },
    "model": {
        "family": ("family", _parse_family),
        "heterogeneous": ("heterogeneous", _parse_bool),
    },
    "run": {
        "rounds": ("rounds", _parse_int),
        "master_seed": ("master_seed", _parse_int),
    },
}

_SWEEP_KEYS = ("axis", "values", "methods")


def _apply_section(target: object, section: str, items: dict[str, str]) -> None:
    schema = _SCHEMA[section]
    for key, raw in items.items():
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' in section [{section}]")
        attr, parser = schema[key]
        if raw.strip() == "":
            continue
        value = raw if parser is None else parser(raw, f"{section}.{key}")
        setattr(target, attr, value)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate an experiment config; unknown keys are rejected."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from exc

    cfg = ExperimentConfig()
    targets = {
        "dataset": cfg.dataset,
        "partition": cfg.partition,
        "train": cfg.train,
        "protocol": cfg.protocol,
        "attack": cfg.attack,
        "model": cfg.model,
        "run": cfg,
    }
    for section in parser.sections():
        if section == "sweep":
            continue
        if section not in targets:
            raise ConfigError(f"unknown section [{section}]")
        _apply_section(targets[section], section, dict(parser.items(section)))

    if cfg.attack.kind == "pcfdla" and not parser.has_option("attack", "peak"):
        log.warning(
            "attack.kind = pcfdla without attack.peak; using default peak %.3g",
            cfg.attack.peak,
        )
    cfg.validate()
    return cfg


def parse_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    return parse_config_text(text, source=str(path))


def parse_sweep_text(text: str, source: str = "<config>") -> SweepConfig:
    """Parse the [sweep] section; duplicate axis values are dropped."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from exc
    if not parser.has_section("sweep"):
        raise ConfigError("sweep config must declare a [sweep] section")
    items = dict(parser.items("sweep"))
    for key in items:
        if key not in _SWEEP_KEYS:
            raise ConfigError(f"unknown key '{key}' in section [sweep]")
    axis = items.get("axis", "").strip()
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}, got {axis!r}")

    raw_values = [v.strip() for v in items.get("values", "").split(",") if v.strip()]
    if not raw_values:
        raise ConfigError("sweep.values must list at least one value")
    values: list[object] = []
    for raw in raw_values:
        if axis == "clients":
            values.append(_parse_int(raw, "sweep.values"))
        elif axis == "heterogeneous":
            values.append(_parse_bool(raw, "sweep.values"))
        else:
            values.append(_parse_float(raw, "sweep.values"))
    deduped: list[object] = []
    for v in values:
        if v in deduped:
            log.warning("sweep.values: duplicate value %r dropped", v)
        else:
            deduped.append(v)

    if "methods" in items and items["methods"].strip():
        methods = tuple(m.strip() for m in items["methods"].split(",") if m.strip())
    else:
        methods = DEFAULT_METHODS
    for m in methods:
        if m not in ATTACK_KINDS:
            raise ConfigError(f"sweep.methods: unknown attack kind {m!r}")
    return SweepConfig(axis=axis, values=tuple(deduped), methods=methods)


def apply_sweep_point(
    base: ExperimentConfig, method: str, axis: str, value: object
) -> ExperimentConfig:
    """Copy of `base` with the attack method and one axis value applied."""
    cfg = parse_config_text(emit_config(base))
    cfg.attack.kind = method
    if axis == "fraction":
        cfg.attack.fraction = float(value)  # type: ignore[arg-type]
    elif axis == "alpha":
        cfg.partition.alpha = float(value)  # type: ignore[arg-type]
    elif axis == "clients":
        cfg.partition.n_clients = int(value)  # type: ignore[arg-type]
    elif axis == "peak":
        cfg.attack.peak = float(value)  # type: ignore[arg-type]
    elif axis == "heterogeneous":
        cfg.model.heterogeneous = bool(value)
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    cfg.validate()
    return cfg


def emit_config(cfg: ExperimentConfig) -> str:
    """Render a config that parses back to an equal ExperimentConfig."""
    parser = configparser.ConfigParser(interpolation=None)

    def put(section: str, key: str, value: object) -> None:
        if value is None:
            return
        if not parser.has_section(section):
            parser.add_section(section)
        if isinstance(value, bool):
            parser.set(section, key, "true" if value else "false")
        elif isinstance(value, float):
            parser.set(section, key, repr(value))
        else:
            parser.set(section, key, str(value))

    d = cfg.dataset
    put("dataset", "kind", d.kind)
    if d.kind == "blobs":
        put("dataset", "n_classes", d.n_classes)
        put("dataset", "samples_per_class", d.samples_per_class)
        put("dataset", "test_samples_per_class", d.test_samples_per_class)
        put("dataset", "dim", d.dim)
        put("dataset", "spread", d.spread)
    else:
        put("dataset", "path", d.path)
        put("dataset", "test_path", d.test_path)

    put("partition", "n_clients", cfg.partition.n_clients)
    put("partition", "alpha", cfg.partition.alpha)
    put("partition", "seed", cfg.partition.seed)

    put("train", "lr", cfg.train.lr)
    put("train", "beta", cfg.train.beta)
    put("train", "temperature", cfg.train.temperature)
    put("train", "local_epochs", cfg.train.local_epochs)
    put("train", "batch_size", cfg.train.batch_size)

    put("protocol", "kind", cfg.protocol.kind)
    put("protocol", "neighbors", cfg.protocol.neighbors)

    put("attack", "kind", cfg.attack.kind)
    put("attack", "peak", cfg.attack.peak)
    put("attack", "fraction", cfg.attack.fraction)
    put("attack", "rng_seed", cfg.attack.rng_seed)
    put("attack", "literal_index", cfg.attack.literal_index)
    put("attack", "clean_local_distill", cfg.attack.clean_local_distill)

    family = " | ".join(",".join(str(w) for w in arch) for arch in cfg.model.family)
    put("model", "family", family)
    put("model", "heterogeneous", cfg.model.heterogeneous)

    put("run", "rounds", cfg.rounds)
    put("run", "master_seed", cfg.master_seed)

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
