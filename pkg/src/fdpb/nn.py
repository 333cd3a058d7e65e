"""Feed-forward network core: forward pass, the two loss terms of the
combined training objective, hand-written backpropagation, and plain SGD.

Hidden layers use ReLU; the last layer is linear and emits raw logits.
Gradients are accumulated in reverse per layer (no autodiff dependency).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class ModelParams:
    """Weights and biases of one client model.

    weights[j] has shape (layer_dims[j + 1], layer_dims[j]) and
    biases[j] has shape (layer_dims[j + 1],).
    """

    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams(
            layer_dims=self.layer_dims,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def validate(self) -> None:
        dims = self.layer_dims
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ConfigError(f"layer_dims must hold >= 2 positive sizes, got {dims}")
        if len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise ConfigError("parameter count does not match layer_dims")
        for j, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[j + 1], dims[j]):
                raise ConfigError(
                    f"weight {j} has shape {w.shape}, expected {(dims[j + 1], dims[j])}"
                )
            if b.shape != (dims[j + 1],):
                raise ConfigError(f"bias {j} has shape {b.shape}, expected {(dims[j + 1],)}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ConfigError(f"layer {j} holds non-finite parameters")


@dataclass
class TrainConfig:
    """Local-training hyperparameters."""

    lr: float = 0.05
    beta: float = 1.0
    temperature: float = 1.0
    local_epochs: int = 1
    batch_size: int = 32

    def validate(self) -> None:
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.beta < 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta}")
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        if self.local_epochs < 1:
            raise ConfigError(f"local_epochs must be >= 1, got {self.local_epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")


def init_params(layer_dims: tuple[int, ...], rng: np.random.Generator) -> ModelParams:
    """Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] from the given stream."""
    dims = tuple(int(d) for d in layer_dims)
    weights, biases = [], []
    for j in range(len(dims) - 1):
        bound = 1.0 / np.sqrt(dims[j])
        weights.append(rng.uniform(-bound, bound, size=(dims[j + 1], dims[j])))
        biases.append(rng.uniform(-bound, bound, size=dims[j + 1]))
    params = ModelParams(layer_dims=dims, weights=weights, biases=biases)
    params.validate()
    return params


def forward_batch(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Logits for a batch of feature rows, shape (batch, n_classes)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.layer_dims[0]:
        raise ValueError(
            f"input has shape {x.shape}, expected (*, {params.layer_dims[0]})"
        )
    a = x
    last = len(params.weights) - 1
    for j, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        a = z if j == last else np.maximum(z, 0.0)
    return a


def forward(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Logits for a single feature vector, shape (n_classes,)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D feature vector, got shape {x.shape}")
    return forward_batch(params, x[None, :])[0]


def softmax(z: np.ndarray) -> np.ndarray:
    """Stable softmax (max-subtraction); output sums to 1."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def ce_loss(z: np.ndarray, label: int) -> float:
    """Cross entropy -log softmax(z)[label]."""
    z = np.asarray(z, dtype=np.float64)
    if not 0 <= label < z.shape[-1]:
        raise IndexError(f"label {label} out of range for {z.shape[-1]} classes")
    return float(-log_softmax(z)[label])


def ce_grad(z: np.ndarray, label: int) -> np.ndarray:
    """Gradient of ce_loss w.r.t. the logits: softmax(z) - onehot(label)."""
    if not 0 <= label < len(z):
        raise IndexError(f"label {label} out of range for {len(z)} classes")
    g = softmax(z)
    g[label] -= 1.0
    return g


def kd_loss(z_student: np.ndarray, z_target: np.ndarray, temperature: float) -> float:
    """Distillation loss: T^2 * KL(softmax(z_student/T) || softmax(z_target/T)).

    Zero exactly when both logit vectors coincide.
    """
    if temperature <= 0:
        raise ConfigError(f"temperature must be positive, got {temperature}")
    zs = np.asarray(z_student, dtype=np.float64)
    zt = np.asarray(z_target, dtype=np.float64)
    if zs.shape != zt.shape:
        raise ValueError(f"logit shapes differ: {zs.shape} vs {zt.shape}")
    lp_s = log_softmax(zs / temperature)
    lp_t = log_softmax(zt / temperature)
    p_s = np.exp(lp_s)
    return float(temperature * temperature * np.sum(p_s * (lp_s - lp_t)))


def kd_grad(z_student: np.ndarray, z_target: np.ndarray, temperature: float) -> np.ndarray:
    """Gradient of kd_loss w.r.t. the student logits."""
    if temperature <= 0:
        raise ConfigError(f"temperature must be positive, got {temperature}")
    lp_s = log_softmax(np.asarray(z_student, dtype=np.float64) / temperature)
    lp_t = log_softmax(np.asarray(z_target, dtype=np.float64) / temperature)
    p_s = np.exp(lp_s)
    diff = lp_s - lp_t
    kl = np.sum(p_s * diff)
    return temperature * p_s * (diff - kl)


def _trace(params: ModelParams, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Forward pass keeping post-activation values for backprop."""
    a = np.asarray(x, dtype=np.float64)
    acts = [a]
    last = len(params.weights) - 1
    for j, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        a = z if j == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts, a


def _gather_targets(
    sample_ids: np.ndarray, knowledge: dict[int, np.ndarray], n_classes: int
) -> tuple[np.ndarray, np.ndarray]:
    """Target-logit matrix plus a row mask for samples that have an entry."""
    batch = len(sample_ids)
    targets = np.zeros((batch, n_classes))
    mask = np.zeros(batch, dtype=bool)
    for i in range(batch):
        target = knowledge.get(int(sample_ids[i]))
        if target is not None:
            targets[i] = target
            mask[i] = True
    return targets, mask


def _batch_loss_and_delta(
    logits: np.ndarray,
    labels: np.ndarray,
    sample_ids: np.ndarray,
    knowledge: dict[int, np.ndarray],
    cfg: TrainConfig,
) -> tuple[float, np.ndarray]:
    """Summed per-sample loss and d(loss)/d(logits) for the whole batch."""
    batch, n_classes = logits.shape
    rows = np.arange(batch)
    lp = log_softmax(logits)
    loss = float(-lp[rows, labels].sum())
    delta = np.exp(lp)
    delta[rows, labels] -= 1.0

    if cfg.beta != 0.0 and knowledge:
        targets, mask = _gather_targets(sample_ids, knowledge, n_classes)
        if mask.any():
            t = cfg.temperature
            lp_s = log_softmax(logits[mask] / t)
            lp_t = log_softmax(targets[mask] / t)
            p_s = np.exp(lp_s)
            diff = lp_s - lp_t
            kl = np.sum(p_s * diff, axis=1)
            loss += cfg.beta * t * t * float(kl.sum())
            delta[mask] += cfg.beta * t * p_s * (diff - kl[:, None])
    return loss, delta


def local_objective(
    params: ModelParams,
    features: np.ndarray,
    labels: np.ndarray,
    sample_ids: np.ndarray,
    knowledge: dict[int, np.ndarray],
    cfg: TrainConfig,
) -> float:
    """Mean over the batch of ce_loss + beta * kd_loss.

    Samples without a knowledge entry contribute no distillation term.
    """
    if len(features) == 0:
        raise ValueError("empty batch")
    logits = forward_batch(params, features)
    loss, _ = _batch_loss_and_delta(
        logits, np.asarray(labels, dtype=np.int64), sample_ids, knowledge, cfg
    )
    return loss / len(features)


def objective_grads(
    params: ModelParams,
    features: np.ndarray,
    labels: np.ndarray,
    sample_ids: np.ndarray,
    knowledge: dict[int, np.ndarray],
    cfg: TrainConfig,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Batch-mean loss and its gradients w.r.t. every weight and bias."""
    if len(features) == 0:
        raise ValueError("empty batch")
    acts, logits = _trace(params, features)
    batch = len(features)
    loss, delta = _batch_loss_and_delta(
        logits, np.asarray(labels, dtype=np.int64), sample_ids, knowledge, cfg
    )
    loss /= batch
    delta /= batch

    grad_w: list[np.ndarray] = [np.empty(0)] * len(params.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(params.biases)
    g = delta
    for j in range(len(params.weights) - 1, -1, -1):
        grad_w[j] = g.T @ acts[j]
        grad_b[j] = g.sum(axis=0)
        if j > 0:
            g = (g @ params.weights[j]) * (acts[j] > 0.0)
    return loss, grad_w, grad_b


def sgd_step(
    params: ModelParams,
    grad_w: list[np.ndarray],
    grad_b: list[np.ndarray],
    lr: float,
) -> ModelParams:
    """One gradient step p - lr * g; returns fresh parameters."""
    if lr <= 0:
        raise ConfigError(f"lr must be positive, got {lr}")
    if len(grad_w) != len(params.weights) or len(grad_b) != len(params.biases):
        raise ValueError("gradient layer count does not match parameters")
    weights, biases = [], []
    for j in range(len(params.weights)):
        if grad_w[j].shape != params.weights[j].shape or grad_b[j].shape != params.biases[j].shape:
            raise ValueError(f"gradient shape mismatch at layer {j}")
        weights.append(params.weights[j] - lr * grad_w[j])
        biases.append(params.biases[j] - lr * grad_b[j])
    return ModelParams(layer_dims=params.layer_dims, weights=weights, biases=biases)


def train_local(
    params: ModelParams,
    features: np.ndarray,
    labels: np.ndarray,
    sample_ids: np.ndarray,
    knowledge: dict[int, np.ndarray],
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> ModelParams:
    """Minibatch SGD on the combined objective for cfg.local_epochs passes.

    Deterministic for a fixed generator state: the only randomness is the
    per-epoch shuffle drawn from `rng`.
    """
    cfg.validate()
    n = len(features)
    if n == 0:
        raise ConfigError("client shard is empty")
    p = params
    for _ in range(cfg.local_epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            _, grad_w, grad_b = objective_grads(
                p, features[idx], labels[idx], sample_ids[idx], knowledge, cfg
            )
            p = sgd_step(p, grad_w, grad_b, cfg.lr)
    return p
