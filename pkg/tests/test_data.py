"""Unit tests for dataset generation, CSV round-trips, and partitioning."""

import numpy as np
import pytest

from fdpb import data
from fdpb.errors import ConfigError, ParseError


# ------------------------------------------------------------ gen_blobs


def test_gen_blobs_counts_and_balance():
    ds = data.gen_blobs(n_classes=2, samples_per_class=5, dim=3, spread=1.0, seed=0)
    assert len(ds) == 10
    assert ds.n_classes == 2
    counts = np.bincount(ds.labels)
    assert counts.tolist() == [5, 5]


def test_gen_blobs_near_zero_spread_is_nearest_centroid_separable():
    ds = data.gen_blobs(n_classes=4, samples_per_class=25, dim=6, spread=1e-9, seed=3)
    # independent oracle: classify by nearest per-class feature mean
    means = np.stack([ds.features[ds.labels == c].mean(axis=0) for c in range(4)])
    dists = ((ds.features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    preds = np.argmin(dists, axis=1)
    assert (preds == ds.labels).mean() == 1.0


def test_gen_blobs_deterministic():
    a = data.gen_blobs(3, 4, 5, 0.7, seed=42)
    b = data.gen_blobs(3, 4, 5, 0.7, seed=42)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_gen_blobs_rejects_bad_arguments():
    with pytest.raises(ConfigError):
        data.gen_blobs(0, 5, 3, 1.0, seed=0)
    with pytest.raises(ConfigError):
        data.gen_blobs(2, 5, 3, 0.0, seed=0)


# ------------------------------------------------------------- CSV io


def test_save_load_round_trip(tmp_path):
    ds = data.gen_blobs(3, 7, 4, 0.9, seed=11)
    path = tmp_path / "ds.csv"
    data.save_dataset(ds, path)
    loaded = data.load_dataset(path)
    assert np.array_equal(loaded.features, ds.features)
    assert np.array_equal(loaded.labels, ds.labels)
    assert loaded.n_classes == ds.n_classes


def test_load_three_row_file(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text(
        "label,f0,f1\n0,1.0,2.0\n1,3.5,-1.25\n0,0.0,0.5\n", encoding="utf-8"
    )
    ds = data.load_dataset(path)
    assert len(ds) == 3
    assert ds.n_classes == 2
    assert ds.features[1].tolist() == [3.5, -1.25]


def test_load_non_numeric_field_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("label,f0\n0,1.0\n1,oops\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":3:"):
        data.load_dataset(path)


def test_load_inconsistent_width_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("label,f0,f1\n0,1.0,2.0\n1,3.0\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":3:"):
        data.load_dataset(path)


def test_load_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,f0\n0,1.0\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":1:"):
        data.load_dataset(path)


# ---------------------------------------------------------- partition


def balanced_labels(n_classes=10, per_class=100):
    return np.repeat(np.arange(n_classes), per_class)


def test_partition_single_client_gets_everything():
    labels = balanced_labels(3, 10)
    shards = data.dirichlet_partition(labels, data.PartitionSpec(1, 1.0, seed=0))
    assert len(shards) == 1
    assert sorted(shards[0].tolist()) == list(range(30))


def test_partition_exhaustive_and_disjoint_across_seeds():
    labels = balanced_labels(5, 40)
    for seed in range(10):
        shards = data.dirichlet_partition(labels, data.PartitionSpec(7, 0.5, seed=seed))
        combined = np.concatenate(shards)
        assert len(combined) == len(labels)
        assert len(np.unique(combined)) == len(labels)


def test_partition_huge_alpha_is_near_uniform():
    labels = balanced_labels(10, 1000)
    shards = data.dirichlet_partition(labels, data.PartitionSpec(10, 1e6, seed=4))
    uniform = np.full(10, 0.1)
    for shard in shards:
        proportions = np.bincount(labels[shard], minlength=10) / len(shard)
        assert np.abs(proportions - uniform).sum() <= 0.15


def test_partition_more_clients_than_samples_raises():
    with pytest.raises(ConfigError):
        data.dirichlet_partition(np.array([0, 1, 0]), data.PartitionSpec(4, 1.0, seed=0))


def test_partition_empty_labels_raises():
    with pytest.raises(ConfigError):
        data.dirichlet_partition(np.array([], dtype=int), data.PartitionSpec(1, 1.0, seed=0))


def test_partition_deterministic():
    labels = balanced_labels(4, 50)
    spec = data.PartitionSpec(6, 0.3, seed=77)
    a = data.dirichlet_partition(labels, spec)
    b = data.dirichlet_partition(labels, spec)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_partition_never_leaves_empty_shards():
    # Small data at low alpha leaves clients empty on some draws; the
    # re-draw mechanism must still deliver a full partition.
    labels = balanced_labels(4, 10)
    for seed in range(30):
        shards = data.dirichlet_partition(labels, data.PartitionSpec(5, 0.3, seed=seed))
        assert all(len(s) > 0 for s in shards)


def test_partition_gives_up_after_bounded_retries():
    # Two classes across eight clients at near-degenerate concentration:
    # practically every draw leaves someone empty, so the retry budget runs out.
    labels = balanced_labels(2, 20)
    with pytest.raises(ConfigError, match="100 attempts"):
        data.dirichlet_partition(labels, data.PartitionSpec(8, 0.05, seed=0))


def shard_entropy(labels, shards, n_classes):
    """Mean per-client entropy of the class-proportion vector."""
    entropies = []
    for shard in shards:
        proportions = np.bincount(labels[shard], minlength=n_classes) / len(shard)
        nonzero = proportions[proportions > 0]
        entropies.append(float(-(nonzero * np.log(nonzero)).sum()))
    return float(np.mean(entropies))


def test_partition_entropy_monotone_in_alpha():
    labels = balanced_labels(10, 100)
    means = []
    for alpha in (0.5, 1.0, 3.0):
        values = [
            shard_entropy(
                labels,
                data.dirichlet_partition(labels, data.PartitionSpec(10, alpha, seed=s)),
                10,
            )
            for s in range(20)
        ]
        means.append(np.mean(values))
    assert means[0] <= means[1] <= means[2]
