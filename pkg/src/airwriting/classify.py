"""Shallow classifiers over pooled image features, plus posterior fusion.

Two model families sit behind one predict interface: a nearest-centroid
model with softmax over negative distances, and a multinomial logistic
model trained by full-batch gradient descent on L2-regularized
cross-entropy with halving backtracking and validation early stopping.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify_io import load_model, save_model  # noqa: F401  (re-export)
from .encoders import ImageStack

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
N_CLASSES = 26

DEFAULT_POOL_FACTOR = 5
MIN_STD = 1e-12


def label_index(label: str) -> int:
    idx = ord(label) - ord("A")
    if not 0 <= idx < N_CLASSES or len(label) != 1:
        raise ValueError(f"label must be a letter A-Z, got {label!r}")
    return idx


@dataclass
class ClassProbabilities:
    """Probability simplex over the 26 letters, index 0 = 'A'."""

    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if self.p.shape != (N_CLASSES,):
            raise ValueError(f"expected {N_CLASSES} probabilities, got shape {self.p.shape}")
        if self.p.min() < -1e-12 or abs(self.p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be non-negative and sum to 1")


@dataclass
class FeatureVector:
    x: np.ndarray
    pool_factor: int
    pool_method: str = "mean"

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).ravel()
        if not np.isfinite(self.x).all():
            raise ValueError("feature vector contains non-finite values")


def pool_features(stack: ImageStack, factor: int = DEFAULT_POOL_FACTOR) -> FeatureVector:
    """
    Non-overlapping factor x factor average pooling per channel, flattened
    channel-major then row-major. Edge windows may be smaller when factor
    does not divide the image size.
    """
    n = stack.size
    if not 1 <= factor <= n:
        raise ValueError(f"pool factor must be in [1, {n}], got {factor}")
    starts = np.arange(0, n, factor)
    widths = np.diff(np.append(starts, n)).astype(float)
    area = np.outer(widths, widths)
    pooled = [
        np.add.reduceat(np.add.reduceat(c.pixels, starts, axis=0), starts, axis=1) / area
        for c in stack.channels
    ]
    return FeatureVector(x=np.stack(pooled).ravel(), pool_factor=factor)


def _stack_features(pairs) -> tuple[np.ndarray, np.ndarray, tuple[int, str]]:
    if not pairs:
        raise ValueError("no training examples")
    feats, labels = zip(*pairs)
    descriptor = (feats[0].pool_factor, feats[0].pool_method)
    if any((f.pool_factor, f.pool_method) != descriptor for f in feats):
        raise ValueError("mixed pooling descriptors in one training set")
    x = np.stack([f.x for f in feats])
    y = np.array([label_index(lb) for lb in labels])
    return x, y, descriptor


def _fit_standardizer(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale < MIN_STD, 1.0, scale)
    return mean, scale


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class CentroidModel:
    centroids: np.ndarray  # (26, D) in standardized feature space
    temperature: float
    mean: np.ndarray
    scale: np.ndarray
    pool_factor: int
    pool_method: str = "mean"
    kind: str = "centroid"

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def proba_matrix(self, x: np.ndarray) -> np.ndarray:
        xs = (x - self.mean) / self.scale
        dists = np.sqrt(((xs[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2))
        return _softmax(-self.temperature * dists)


@dataclass
class LogisticConfig:
    step: float = 0.1
    l2: float = 1e-4
    max_epochs: int = 2000
    patience: int = 10
    seed: int = 0


@dataclass
class LogisticModel:
    weights: np.ndarray  # (26, D)
    bias: np.ndarray  # (26,)
    mean: np.ndarray
    scale: np.ndarray
    pool_factor: int
    config: LogisticConfig
    pool_method: str = "mean"
    kind: str = "logistic"
    train_losses: list[float] = field(default_factory=list, repr=False)
    val_losses: list[float] = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def proba_matrix(self, x: np.ndarray) -> np.ndarray:
        xs = (x - self.mean) / self.scale
        return _softmax(xs @ self.weights.T + self.bias)


def fit_centroid(train, temperature: float = 1.0) -> CentroidModel:
    """
    Per-class mean of standardized features; prediction is a softmax over
    -temperature * euclidean distance to each centroid. Every letter must
    appear in the training set.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    x, y, (factor, method) = _stack_features(train)
    missing = sorted(set(range(N_CLASSES)) - set(y.tolist()))
    if missing:
        raise ValueError("classes missing from training set: " + "".join(LETTERS[i] for i in missing))
    mean, scale = _fit_standardizer(x)
    xs = (x - mean) / scale
    centroids = np.stack([xs[y == c].mean(axis=0) for c in range(N_CLASSES)])
    return CentroidModel(
        centroids=centroids,
        temperature=float(temperature),
        mean=mean,
        scale=scale,
        pool_factor=factor,
        pool_method=method,
    )


def cross_entropy_loss_grad(weights, bias, x, y_idx, l2=0.0):
    """
    L2-regularized multiclass cross-entropy and its analytic gradient.

    loss  = mean of -log softmax(x @ W.T + b)[y] + l2/2 * ||W||^2
    Bias is not regularized. Returns (loss, grad_weights, grad_bias).
    """
    n = x.shape[0]
    probs = _softmax(x @ weights.T + bias)
    nll = -np.log(probs[np.arange(n), y_idx] + 0.0)
    loss = nll.mean() + 0.5 * l2 * float((weights**2).sum())
    delta = probs.copy()
    delta[np.arange(n), y_idx] -= 1.0
    grad_w = delta.T @ x / n + l2 * weights
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


def _logistic_loss(weights, bias, x, y_idx, l2):
    n = x.shape[0]
    # non-finite intermediates surface as a clean divergence error upstream
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        probs = _softmax(x @ weights.T + bias)
        loss = -np.log(probs[np.arange(n), y_idx]).mean() + 0.5 * l2 * float((weights**2).sum())
    return loss, probs


def fit_logistic_arrays(
    x: np.ndarray,
    y: np.ndarray,
    x_val: np.ndarray | None,
    y_val: np.ndarray | None,
    config: LogisticConfig,
    pool_factor: int,
    pool_method: str = "mean",
) -> LogisticModel:
    """Array-level trainer; `fit_logistic` is the (FeatureVector, label) front end.

    Weights start at zero, features are standardized with train statistics,
    and each epoch takes one full-batch gradient step. If a step would
    increase the training loss it is halved and retried, so the training
    loss is non-increasing. Training stops at max_epochs, when the step
    underflows, or when validation loss has not improved for `patience`
    consecutive epochs; with a validation set the best-validation
    parameters are returned.
    """
    mean, scale = _fit_standardizer(x)
    xs = (x - mean) / scale
    xvs = (x_val - mean) / scale if x_val is not None and len(x_val) else None
    n, dim = xs.shape
    weights = np.zeros((N_CLASSES, dim))
    bias = np.zeros(N_CLASSES)
    step = config.step
    loss, probs = _logistic_loss(weights, bias, xs, y, config.l2)
    if not np.isfinite(loss):
        raise RuntimeError("training diverged at epoch 0: non-finite loss")
    train_losses = [float(loss)]
    val_losses: list[float] = []
    best = (np.inf, weights, bias)
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        grad_w = delta.T @ xs / n + config.l2 * weights
        grad_b = delta.mean(axis=0)
        while True:
            new_w = weights - step * grad_w
            new_b = bias - step * grad_b
            new_loss, new_probs = _logistic_loss(new_w, new_b, xs, y, config.l2)
            if not np.isfinite(new_loss):
                raise RuntimeError(f"training diverged at epoch {epoch}: non-finite loss")
            if new_loss <= loss or step < 1e-12:
                break
            step /= 2.0
        if step < 1e-12:
            break
        weights, bias, loss, probs = new_w, new_b, new_loss, new_probs
        train_losses.append(float(loss))
        if xvs is not None:
            val_loss, _ = _logistic_loss(weights, bias, xvs, y_val, config.l2)
            if not np.isfinite(val_loss):
                raise RuntimeError(f"training diverged at epoch {epoch}: non-finite validation loss")
            val_losses.append(float(val_loss))
            if val_loss < best[0]:
                best = (val_loss, weights.copy(), bias.copy())
                stale = 0
            else:
                stale += 1
                if stale >= config.patience:
                    break
    if xvs is not None and np.isfinite(best[0]):
        _, weights, bias = best
    return LogisticModel(
        weights=weights,
        bias=bias,
        mean=mean,
        scale=scale,
        pool_factor=pool_factor,
        config=config,
        pool_method=pool_method,
        train_losses=train_losses,
        val_losses=val_losses,
    )


def fit_logistic(train, val=None, config: LogisticConfig | None = None) -> LogisticModel:
    config = config or LogisticConfig()
    x, y, (factor, method) = _stack_features(train)
    if val:
        x_val, y_val, _ = _stack_features(val)
    else:
        x_val, y_val = None, None
    return fit_logistic_arrays(x, y, x_val, y_val, config, factor, method)


@dataclass
class SensorModelPair:
    """Independently trained accelerometer and gyroscope models of one kind."""

    accel: CentroidModel | LogisticModel
    gyro: CentroidModel | LogisticModel


def predict_proba(model, item) -> ClassProbabilities:
    """
    Posterior over letters for an ImageStack (pooled with the model's own
    descriptor) or an already-pooled FeatureVector.
    """
    if isinstance(item, ImageStack):
        feat = pool_features(item, model.pool_factor)
    elif isinstance(item, FeatureVector):
        feat = item
    else:
        raise TypeError(f"expected ImageStack or FeatureVector, got {type(item).__name__}")
    if feat.x.shape[0] != model.dim:
        raise ValueError(f"feature dimension {feat.x.shape[0]} does not match model ({model.dim})")
    return ClassProbabilities(p=model.proba_matrix(feat.x[None, :])[0])


def fuse(p_accel: ClassProbabilities, p_gyro: ClassProbabilities) -> ClassProbabilities:
    """Average the two sensors' posteriors elementwise."""
    return ClassProbabilities(p=(p_accel.p + p_gyro.p) / 2.0)


def predict_label(p: ClassProbabilities) -> str:
    """Letter of the maximal probability; ties go to the lowest index (A first)."""
    return LETTERS[int(np.argmax(p.p))]
