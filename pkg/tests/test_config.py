"""Config parsing: defaults, diagnostics, round-trip, sweep grids."""

import logging

import pytest

from fdpb import config
from fdpb.errors import ConfigError


def test_minimal_config_applies_defaults():
    cfg = config.parse_config_text("[dataset]\nkind = blobs\n\n[run]\nrounds = 5\n")
    assert cfg.partition.alpha == 1.0
    assert cfg.partition.n_clients == 10
    assert cfg.train.lr == 0.05
    assert cfg.train.beta == 1.0
    assert cfg.attack.kind == "none"
    assert cfg.protocol.kind == "label_avg"
    assert cfg.rounds == 5


def test_pcfdla_without_peak_warns_and_defaults(caplog):
    text = "[dataset]\nkind = blobs\n\n[attack]\nkind = pcfdla\nfraction = 0.2\n"
    with caplog.at_level(logging.WARNING, logger="fdpb"):
        cfg = config.parse_config_text(text)
    assert cfg.attack.peak == 5.0
    assert any("peak" in rec.message for rec in caplog.records)


def test_explicit_peak_does_not_warn(caplog):
    text = "[dataset]\nkind = blobs\n\n[attack]\nkind = pcfdla\npeak = 2.0\nfraction = 0.2\n"
    with caplog.at_level(logging.WARNING, logger="fdpb"):
        cfg = config.parse_config_text(text)
    assert cfg.attack.peak == 2.0
    assert not caplog.records


def test_fraction_out_of_bounds_rejected():
    text = "[dataset]\nkind = blobs\n\n[attack]\nkind = zero\nfraction = 1.5\n"
    with pytest.raises(ConfigError, match="fraction"):
        config.parse_config_text(text)


def test_unknown_key_named_in_diagnostic():
    text = "[dataset]\nkind = blobs\nbogus_key = 3\n"
    with pytest.raises(ConfigError, match="bogus_key"):
        config.parse_config_text(text)


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="mystery"):
        config.parse_config_text("[dataset]\nkind = blobs\n\n[mystery]\nx = 1\n")


def test_type_mismatch_names_key():
    text = "[dataset]\nkind = blobs\n\n[run]\nrounds = soon\n"
    with pytest.raises(ConfigError, match="run.rounds"):
        config.parse_config_text(text)


def test_csv_kind_requires_paths():
    with pytest.raises(ConfigError, match="path"):
        config.parse_config_text("[dataset]\nkind = csv\n")


def test_family_parsing():
    text = "[dataset]\nkind = blobs\n\n[model]\nfamily = 32 | 64 | 32,16\nheterogeneous = true\n"
    cfg = config.parse_config_text(text)
    assert cfg.model.family == ((32,), (64,), (32, 16))
    assert cfg.model.heterogeneous is True


def test_round_trip_emit_then_parse_equal():
    text = """
[dataset]
kind = blobs
n_classes = 6
samples_per_class = 42
spread = 0.75

[partition]
n_clients = 7
alpha = 0.5
seed = 99

[train]
lr = 0.01
beta = 0.25
temperature = 2.0

[protocol]
kind = cache_lite
neighbors = 8

[attack]
kind = pcfdla
peak = 3.5
fraction = 0.2
literal_index = true
clean_local_distill = false

[model]
family = 16,8 | 24
heterogeneous = true

[run]
rounds = 12
master_seed = 314
"""
    cfg = config.parse_config_text(text)
    emitted = config.emit_config(cfg)
    reparsed = config.parse_config_text(emitted)
    assert reparsed == cfg
    # emission is a fixed point
    assert config.emit_config(reparsed) == emitted


def test_round_trip_preserves_unset_optionals():
    cfg = config.parse_config_text("[dataset]\nkind = blobs\n")
    reparsed = config.parse_config_text(config.emit_config(cfg))
    assert reparsed.partition.seed is None
    assert reparsed.attack.rng_seed is None
    assert reparsed.attack.clean_local_distill is None
    assert reparsed == cfg


# ------------------------------------------------------------------ sweep


SWEEP_TEXT = """
[dataset]
kind = blobs

[sweep]
axis = fraction
values = 0.1, 0.2, 0.3
methods = none, zero, pcfdla
"""


def test_sweep_parses_axis_values_methods():
    sweep = config.parse_sweep_text(SWEEP_TEXT)
    assert sweep.axis == "fraction"
    assert sweep.values == (0.1, 0.2, 0.3)
    assert sweep.methods == ("none", "zero", "pcfdla")


def test_sweep_defaults_to_all_methods():
    text = "[dataset]\nkind = blobs\n\n[sweep]\naxis = peak\nvalues = 1, 2\n"
    sweep = config.parse_sweep_text(text)
    assert sweep.methods == ("none", "random", "zero", "fdla", "pcfdla")


def test_sweep_duplicate_values_deduplicated(caplog):
    text = "[dataset]\nkind = blobs\n\n[sweep]\naxis = peak\nvalues = 1, 2, 1\n"
    with caplog.at_level(logging.WARNING, logger="fdpb"):
        sweep = config.parse_sweep_text(text)
    assert sweep.values == (1.0, 2.0)
    assert any("duplicate" in rec.message for rec in caplog.records)


def test_sweep_missing_section_rejected():
    with pytest.raises(ConfigError, match="sweep"):
        config.parse_sweep_text("[dataset]\nkind = blobs\n")


def test_sweep_empty_values_rejected():
    text = "[dataset]\nkind = blobs\n\n[sweep]\naxis = peak\nvalues =\n"
    with pytest.raises(ConfigError, match="values"):
        config.parse_sweep_text(text)


def test_sweep_unknown_axis_rejected():
    text = "[dataset]\nkind = blobs\n\n[sweep]\naxis = gravity\nvalues = 1\n"
    with pytest.raises(ConfigError, match="axis"):
        config.parse_sweep_text(text)


def test_apply_sweep_point_sets_axis_and_method():
    base = config.parse_config_text("[dataset]\nkind = blobs\n")
    cfg = config.apply_sweep_point(base, "pcfdla", "fraction", 0.3)
    assert cfg.attack.kind == "pcfdla"
    assert cfg.attack.fraction == 0.3
    assert base.attack.kind == "none"  # base untouched

    cfg = config.apply_sweep_point(base, "fdla", "clients", 20)
    assert cfg.partition.n_clients == 20
    cfg = config.apply_sweep_point(base, "zero", "heterogeneous", True)
    assert cfg.model.heterogeneous is True
    cfg = config.apply_sweep_point(base, "pcfdla", "alpha", 3.0)
    assert cfg.partition.alpha == 3.0
    cfg = config.apply_sweep_point(base, "pcfdla", "peak", 2.0)
    assert cfg.attack.peak == 2.0
