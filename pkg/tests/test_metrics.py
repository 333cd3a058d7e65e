"""Unit tests for accuracy metrics, confusion counting, and PCA."""

import numpy as np
import pytest

from fdpb import metrics, nn
from fdpb.data import Dataset, gen_blobs


def constant_class_model(n_features, n_classes, winner=0):
    """Zero weights, bias peaked on one class: always predicts `winner`."""
    bias = np.zeros(n_classes)
    bias[winner] = 1.0
    return nn.ModelParams(
        layer_dims=(n_features, n_classes),
        weights=[np.zeros((n_classes, n_features))],
        biases=[bias],
    )


def zero_model(n_features, n_classes):
    return nn.ModelParams(
        layer_dims=(n_features, n_classes),
        weights=[np.zeros((n_classes, n_features))],
        biases=[np.zeros(n_classes)],
    )


# ------------------------------------------------------------- accuracy


def test_accuracy_constant_predictor_on_balanced_two_class():
    test = Dataset(
        features=np.random.default_rng(0).normal(size=(50, 3)),
        labels=np.array([0] * 25 + [1] * 25),
        n_classes=2,
    )
    assert metrics.accuracy(constant_class_model(3, 2, winner=0), test) == 0.5


def test_accuracy_zero_model_ties_break_to_class_zero():
    labels = np.repeat(np.arange(10), 5)
    test = Dataset(
        features=np.random.default_rng(1).normal(size=(50, 4)),
        labels=labels,
        n_classes=10,
    )
    assert metrics.accuracy(zero_model(4, 10), test) == pytest.approx(0.1)


def test_accuracy_trained_model_on_separable_blobs():
    ds = gen_blobs(n_classes=3, samples_per_class=40, dim=5, spread=0.01, seed=2)
    params = nn.init_params((5, 8, 3), np.random.default_rng(3))
    cfg = nn.TrainConfig(lr=0.1, beta=0.0, local_epochs=30, batch_size=16)
    params = nn.train_local(
        params, ds.features, ds.labels, np.arange(len(ds)), {}, cfg, np.random.default_rng(4)
    )
    assert metrics.accuracy(params, ds) >= 0.95


def test_accuracy_empty_test_set_raises():
    test = Dataset(features=np.empty((0, 2)), labels=np.empty(0, dtype=int), n_classes=2)
    with pytest.raises(ValueError):
        metrics.accuracy(zero_model(2, 2), test)


# ------------------------------------------------------------ averages


def test_tol_avg_acc_examples():
    assert metrics.tol_avg_acc(np.array([0.5, 0.7])) == pytest.approx(0.6, abs=1e-15)
    assert metrics.tol_avg_acc(np.array([0.3, 0.3, 0.3])) == pytest.approx(0.3, abs=1e-15)


def test_tol_avg_acc_matches_scalar_summation():
    rng = np.random.default_rng(5)
    accs = rng.uniform(size=50)
    total = 0.0
    for a in accs:
        total += float(a)
    assert metrics.tol_avg_acc(accs) == pytest.approx(total / 50.0, abs=1e-15)


def test_tol_avg_acc_empty_raises():
    with pytest.raises(ValueError):
        metrics.tol_avg_acc(np.array([]))


def test_vctm_avg_acc_examples():
    assert metrics.vctm_avg_acc(
        np.array([0.2, 0.8]), np.array([False, True])
    ) == pytest.approx(0.8)


def test_vctm_avg_acc_all_honest_equals_tol():
    rng = np.random.default_rng(6)
    accs = rng.uniform(size=9)
    mask = np.ones(9, dtype=bool)
    assert metrics.vctm_avg_acc(accs, mask) == metrics.tol_avg_acc(accs)


def test_vctm_avg_acc_thirty_percent_malicious():
    rng = np.random.default_rng(7)
    accs = rng.uniform(size=50)
    mask = np.ones(50, dtype=bool)
    mask[:15] = False
    total = 0.0
    for a in accs[15:]:
        total += float(a)
    assert metrics.vctm_avg_acc(accs, mask) == pytest.approx(total / 35.0, abs=1e-15)


def test_vctm_avg_acc_no_victims_raises():
    with pytest.raises(ValueError):
        metrics.vctm_avg_acc(np.array([0.4]), np.array([False]))


def test_averages_permutation_invariant_and_bounded():
    rng = np.random.default_rng(8)
    accs = rng.uniform(size=12)
    mask = rng.random(12) > 0.4
    if not mask.any():
        mask[0] = True
    perm = rng.permutation(12)
    assert metrics.tol_avg_acc(accs[perm]) == pytest.approx(metrics.tol_avg_acc(accs))
    assert metrics.vctm_avg_acc(accs[perm], mask[perm]) == pytest.approx(
        metrics.vctm_avg_acc(accs, mask)
    )
    assert accs.min() <= metrics.tol_avg_acc(accs) <= accs.max()


# ----------------------------------------------------------- confusion


def test_misdirection_perfect_classifier_is_zero():
    preds = np.array([0, 1, 2, 0, 1, 2])
    labels = preds.copy()
    confusion = metrics.confusion_matrix(preds, labels, 3)
    for decoy in (1, 2):
        assert metrics.misdirection_count(confusion, 0, decoy) == 0


def test_misdirection_constant_decoy_counts_class_size():
    labels = np.array([0] * 7 + [1] * 3)
    preds = np.full(10, 1)
    confusion = metrics.confusion_matrix(preds, labels, 2)
    assert metrics.misdirection_count(confusion, 0, 1) == 7


def test_misdirection_hand_built_matrix_read_back():
    confusion = np.array([[5, 2, 0], [1, 6, 1], [0, 3, 4]])
    assert metrics.misdirection_count(confusion, 2, 1) == 3
    assert metrics.misdirection_count(confusion, 0, 0) == 5


def test_misdirection_index_out_of_range():
    confusion = np.zeros((2, 2), dtype=int)
    with pytest.raises(IndexError):
        metrics.misdirection_count(confusion, 0, 5)


def test_confusion_rows_sum_to_class_counts():
    rng = np.random.default_rng(9)
    labels = rng.integers(0, 4, size=60)
    preds = rng.integers(0, 4, size=60)
    confusion = metrics.confusion_matrix(preds, labels, 4)
    assert confusion.sum() == 60
    for c in range(4):
        assert confusion[c].sum() == int((labels == c).sum())


# ----------------------------------------------------------------- pca


def test_pca_identical_vectors_map_to_origin():
    x = np.tile(np.array([1.0, 2.0, 3.0, 4.0]), (6, 1))
    out = metrics.pca_project(x)
    assert np.array_equal(out, np.zeros((6, 2)))


def test_pca_rank_one_line_second_coordinate_vanishes():
    t = np.arange(1.0, 13.0)
    direction = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    x = t[:, None] * direction[None, :]
    out = metrics.pca_project(x)
    assert np.abs(out[:, 1]).max() < 1e-8


def test_pca_variance_ordering_matches_eigh_oracle():
    rng = np.random.default_rng(10)
    for n, d in ((12, 5), (6, 40)):
        x = rng.normal(size=(n, d)) * rng.uniform(0.5, 3.0, size=d)
        out = metrics.pca_project(x)
        assert out.var(axis=0, ddof=1)[0] >= out.var(axis=0, ddof=1)[1]
        # brute-force covariance eigendecomposition oracle
        centered = x - x.mean(axis=0)
        evals = np.linalg.eigvalsh(centered.T @ centered / (n - 1))[::-1]
        assert out.var(axis=0, ddof=1) == pytest.approx(evals[:2], rel=1e-8)


def test_pca_projection_matches_eigh_directions():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(15, 6)) * np.array([3.0, 2.0, 1.0, 0.5, 0.25, 0.1])
    out = metrics.pca_project(x)
    centered = x - x.mean(axis=0)
    evals, evecs = np.linalg.eigh(centered.T @ centered / 14.0)
    order = np.argsort(evals)[::-1]
    for j in range(2):
        v = evecs[:, order[j]]
        lead = int(np.argmax(np.abs(v)))
        if v[lead] < 0:
            v = -v
        assert out[:, j] == pytest.approx(centered @ v, abs=1e-9)


def test_pca_shift_invariance():
    rng = np.random.default_rng(12)
    x = rng.normal(size=(10, 7))
    shifted = x + rng.normal(scale=100.0, size=7)
    a = metrics.pca_project(x)
    b = metrics.pca_project(shifted)
    assert np.abs(a - b).max() < 1e-9


def test_pca_input_validation():
    with pytest.raises(ValueError):
        metrics.pca_project(np.ones((1, 5)))
    with pytest.raises(ValueError):
        metrics.pca_project(np.ones((4, 1)))


def test_jacobi_matches_eigh_on_random_symmetric():
    rng = np.random.default_rng(13)
    for n in (2, 5, 9):
        a = rng.normal(size=(n, n))
        sym = (a + a.T) / 2.0
        evals, evecs = metrics._jacobi_eigh(sym)
        expected = np.sort(np.linalg.eigvalsh(sym))
        assert np.sort(evals) == pytest.approx(expected, abs=1e-10)
        # eigenvector property: sym @ v = lambda * v
        for j in range(n):
            assert sym @ evecs[:, j] == pytest.approx(evals[j] * evecs[:, j], abs=1e-8)
