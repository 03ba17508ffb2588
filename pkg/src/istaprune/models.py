"""Small differentiable models with exact batch-averaged gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODEL_KINDS = ("linear", "logistic", "mlp2")


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=np.float64)
        y = np.asarray(self.targets, dtype=np.float64)
        if X.ndim != 2 or y.ndim != 1:
            raise ValueError("inputs must be 2-D and targets 1-D")
        if X.shape[0] != y.shape[0]:
            raise ValueError("inputs and targets disagree on the sample count")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_features(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    n_features: int
    hidden: int = 8

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.n_features < 1:
            raise ValueError("n_features must be at least 1")
        if self.kind == "mlp2" and self.hidden < 1:
            raise ValueError("hidden must be at least 1")


def n_params(spec: ModelSpec) -> int:
    if spec.kind in ("linear", "logistic"):
        return spec.n_features
    # Two layers: hidden x features weights, hidden bias, output weights, output bias.
    return spec.hidden * spec.n_features + spec.hidden + spec.hidden + 1


def init_params(spec: ModelSpec, seed: int, scale: float = 1.0) -> np.ndarray:
    """Seeded Gaussian initialization; mlp2 layers are fan-in scaled."""
    rng = np.random.default_rng(seed)
    if spec.kind in ("linear", "logistic"):
        return scale * rng.standard_normal(spec.n_features)
    h, p = spec.hidden, spec.n_features
    w1 = rng.standard_normal(h * p) * (scale / np.sqrt(p))
    b1 = np.zeros(h)
    w2 = rng.standard_normal(h) * (scale / np.sqrt(h))
    b2 = np.zeros(1)
    return np.concatenate([w1, b1, w2, b2])


def _unpack_mlp2(spec: ModelSpec, params: np.ndarray):
    h, p = spec.hidden, spec.n_features
    w1 = params[: h * p].reshape(h, p)
    b1 = params[h * p : h * p + h]
    w2 = params[h * p + h : h * p + 2 * h]
    b2 = params[h * p + 2 * h]
    return w1, b1, w2, b2


def loss_and_grad(
    spec: ModelSpec, params: np.ndarray, data: Dataset, batch_idx
) -> tuple[float, np.ndarray]:
    """Batch-averaged loss and its exact gradient in the flat parameters.

    linear: mean squared error 0.5 * (x.w - y)^2; logistic: cross entropy on
    0/1 targets through a sigmoid of x.w; mlp2: squared error through a
    tanh hidden layer. ``batch_idx`` of None means the full dataset; an
    empty batch raises.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (n_params(spec),):
        raise ValueError(f"expected {n_params(spec)} parameters, got shape {params.shape}")
    if batch_idx is None:
        X = data.inputs
        y = data.targets
    else:
        batch_idx = np.asarray(batch_idx, dtype=np.intp)
        if batch_idx.size == 0:
            raise ValueError("batch must contain at least one sample")
        X = data.inputs[batch_idx]
        y = data.targets[batch_idx]
    m = X.shape[0]

    if spec.kind == "linear":
        r = X @ params - y
        loss = 0.5 * float(r @ r) / m
        grad = X.T @ r / m
        return loss, grad

    if spec.kind == "logistic":
        z = X @ params
        # log(1 + e^z) - y*z, computed without overflow for large |z|.
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
        prob = 1.0 / (1.0 + np.exp(-np.clip(z, -700, 700)))
        grad = X.T @ (prob - y) / m
        return loss, grad

    w1, b1, w2, b2 = _unpack_mlp2(spec, params)
    hidden = np.tanh(X @ w1.T + b1)
    pred = hidden @ w2 + b2
    r = pred - y
    loss = 0.5 * float(r @ r) / m
    d_pred = r / m
    g_w2 = hidden.T @ d_pred
    g_b2 = np.array([np.sum(d_pred)])
    d_hidden = np.outer(d_pred, w2) * (1.0 - hidden**2)
    g_w1 = d_hidden.T @ X
    g_b1 = d_hidden.sum(axis=0)
    grad = np.concatenate([g_w1.ravel(), g_b1, g_w2, g_b2])
    return loss, grad


def gen_sparse_regression(
    n_samples: int, n_features: int, k_nonzero: int, noise_std: float, seed: int
) -> tuple[Dataset, np.ndarray]:
    """Gaussian design with a planted k-sparse coefficient vector.

    Nonzero true coefficients have magnitude in [1, 2] with random signs, so
    the support is well separated from zero. Same seed, same bytes.
    """
    if n_samples < 1 or n_features < 1:
        raise ValueError("n_samples and n_features must be at least 1")
    if not 0 <= k_nonzero <= n_features:
        raise ValueError("k_nonzero must lie in [0, n_features]")
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, n_features))
    w_true = np.zeros(n_features)
    support = rng.choice(n_features, size=k_nonzero, replace=False)
    w_true[support] = rng.uniform(1.0, 2.0, size=k_nonzero) * rng.choice([-1.0, 1.0], size=k_nonzero)
    y = X @ w_true
    if noise_std > 0:
        y = y + noise_std * rng.standard_normal(n_samples)
    return Dataset(inputs=X, targets=y), w_true
