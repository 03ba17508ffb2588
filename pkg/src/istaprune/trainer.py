"""Reparameterized pruning trainer.

SGD runs on a hidden parameter theta while the network uses the pruned
weights w = soft_threshold(theta, d). The threshold d follows a schedule,
or is the sigmoid of a trained logit. Two gradient conventions for theta:

- "str-subgradient": the exact subgradient of the thresholding map, which
  masks components with |theta| <= d (their weight is stuck at zero);
- "stds-identity": a straight-through estimate that passes the weight
  gradient to theta unchanged, so pruned components keep training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as sigmoid

from .core import as_vector, soft_threshold
from .models import Dataset, ModelSpec, loss_and_grad, n_params
from .schedulers import (
    LearningRateSpec,
    SchedulerSpec,
    eta_at_step,
    str_trainable_threshold_step,
    threshold_at,
)

GRADIENT_MODES = ("str-subgradient", "stds-identity")


@dataclass(frozen=True)
class TrainerConfig:
    scheduler: SchedulerSpec
    lr: LearningRateSpec
    gradient_mode: str = "stds-identity"
    weight_decay: float = 0.0
    momentum: float = 0.0
    seed: int = 0
    record_trace: bool = True

    def __post_init__(self):
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.scheduler.kind == "str" and self.gradient_mode != "str-subgradient":
            raise ValueError("a trainable threshold requires the str-subgradient mode")


@dataclass(frozen=True)
class TrainState:
    """Snapshot between iterations; w == soft_threshold(theta, d) always holds."""

    theta: np.ndarray
    w: np.ndarray
    t: int
    d: float
    lr_accum: float
    s: float | None = None
    velocity: np.ndarray | None = None


class TrainingDiverged(RuntimeError):
    """Loss or parameters left the finite range; carries the last state."""

    def __init__(self, message: str, state: TrainState):
        super().__init__(message)
        self.state = state


def init(w0, cfg: TrainerConfig) -> TrainState:
    """Fresh state at t = 0: hidden parameter w0, weights already thresholded.

    A prune-at-init schedule applies its full threshold immediately, so weights
    inside [-D, D] start (and stay) at zero unless theta escapes.
    """
    theta = as_vector(w0).copy()
    sched = cfg.scheduler
    s = None
    if sched.kind == "str":
        s = sched.s_init
        d = float(sigmoid(s))
    elif sched.kind == "prune-at-init":
        d = sched.final_threshold
    else:
        d = threshold_at(sched, cfg.lr, 0)
    velocity = np.zeros_like(theta) if cfg.momentum > 0 else None
    return TrainState(
        theta=theta,
        w=soft_threshold(theta, d),
        t=0,
        d=d,
        lr_accum=0.0,
        s=s,
        velocity=velocity,
    )


def train_step(state: TrainState, grad_w, cfg: TrainerConfig) -> TrainState:
    """Advance one iteration given the weight gradient at the current w.

    theta' = theta - eta * (masked grad + weight_decay * theta), then the
    threshold moves to its t+1 value and w' = soft_threshold(theta', d').
    """
    grad_w = np.asarray(grad_w, dtype=np.float64)
    if grad_w.shape != state.theta.shape:
        raise ValueError("gradient shape does not match the parameters")
    eta = eta_at_step(cfg.lr, state.t)

    if cfg.gradient_mode == "str-subgradient":
        g_theta = grad_w * (np.abs(state.theta) > state.d)
    else:
        g_theta = grad_w
    update = g_theta + cfg.weight_decay * state.theta
    velocity = state.velocity
    if cfg.momentum > 0:
        velocity = cfg.momentum * state.velocity + update
        update = velocity

    theta_new = state.theta - eta * update
    t_new = state.t + 1
    s_new = state.s
    if cfg.scheduler.kind == "str":
        sig = float(sigmoid(state.s))
        live = state.w != 0.0
        grad_s = -sig * (1.0 - sig) * float(
            np.sum(grad_w[live] * np.sign(state.theta[live]))
        )
        s_new, d_new = str_trainable_threshold_step(state.s, grad_s, eta, cfg.weight_decay)
    else:
        d_new = threshold_at(cfg.scheduler, cfg.lr, t_new)

    return TrainState(
        theta=theta_new,
        w=soft_threshold(theta_new, d_new),
        t=t_new,
        d=d_new,
        lr_accum=state.lr_accum + eta,
        s=s_new,
        velocity=velocity,
    )


def sparsity(w, zero_tol: float = 0.0) -> float:
    """Fraction of entries with |w| <= zero_tol (exact zeros by default)."""
    if zero_tol < 0:
        raise ValueError("zero_tol must be non-negative")
    w = np.asarray(w, dtype=np.float64)
    return float(np.mean(np.abs(w) <= zero_tol))


@dataclass
class RunResult:
    state: TrainState
    iters: np.ndarray
    losses: np.ndarray
    sparsities: np.ndarray
    thresholds: np.ndarray
    penalties: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.state.w


def run(
    cfg: TrainerConfig,
    spec: ModelSpec,
    data: Dataset,
    w0,
    observer=None,
) -> RunResult:
    """Full training loop with seeded epoch shuffling.

    Each epoch draws one permutation from the run's generator and splits it
    into B nearly equal batches. Metrics rows land after every step when
    record_trace is set, else once per epoch; each row holds the batch loss
    at the pre-step weights and the sparsity/threshold after the step, plus
    the implicit penalty (d(t+1) - d(t)) / eta(t) of the step taken.

    ``observer(prev_state, grad_w, eta, new_state)`` is invoked after every
    step when given; the verifier hooks in through it.
    """
    w0 = as_vector(w0)
    if len(w0) != n_params(spec):
        raise ValueError(f"w0 has {len(w0)} entries, model needs {n_params(spec)}")
    if cfg.lr.batches > data.n_samples:
        raise ValueError("more batches per epoch than samples")

    rng = np.random.default_rng(cfg.seed)
    state = init(w0, cfg)
    rows = []
    for epoch in range(cfg.lr.epochs):
        perm = rng.permutation(data.n_samples)
        for i, batch in enumerate(np.array_split(perm, cfg.lr.batches)):
            loss, grad = loss_and_grad(spec, state.w, data, batch)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at t={state.t} (epoch {epoch}, batch {i}, "
                    f"d={state.d:.6g}, max|theta|={np.max(np.abs(state.theta)):.6g})",
                    state,
                )
            prev = state
            eta = eta_at_step(cfg.lr, state.t)
            state = train_step(state, grad, cfg)
            if not np.all(np.isfinite(state.theta)):
                raise TrainingDiverged(
                    f"non-finite parameters after t={prev.t} (epoch {epoch}, batch {i}, "
                    f"eta={eta:.6g}, d={state.d:.6g})",
                    state,
                )
            if observer is not None:
                observer(prev, grad, eta, state)
            if cfg.record_trace or i == cfg.lr.batches - 1:
                rows.append(
                    (state.t, loss, sparsity(state.w), state.d, (state.d - prev.d) / eta)
                )
    cols = list(zip(*rows))
    return RunResult(
        state=state,
        iters=np.array(cols[0], dtype=np.intp),
        losses=np.array(cols[1]),
        sparsities=np.array(cols[2]),
        thresholds=np.array(cols[3]),
        penalties=np.array(cols[4]),
    )
