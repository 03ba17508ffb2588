"""Threshold schedules for soft-threshold pruning and their induced penalties.

Training iterations are indexed t = n*B + b (epoch n of N, batch b of B,
T = N*B steps total). A schedule produces the threshold d(t) applied as
w = soft_threshold(theta, d(t)); its forward differences divided by the
realized learning rate form the implicit l1 penalty trace
mu(t) = (d(t+1) - d(t)) / eta(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit as sigmoid

from .core import as_vector, integrate

LR_KINDS = ("constant", "cosine", "polynomial")

SCHEDULER_KINDS = (
    "lats",
    "slats",
    "integral",
    "pgh",
    "sine",
    "linear",
    "log2",
    "prune-at-init",
    "str",
)

# Scheduler kinds whose threshold is pinned by a final value D.
_D_KINDS = ("slats", "integral", "pgh", "sine", "linear", "log2", "prune-at-init")


@dataclass(frozen=True)
class LearningRateSpec:
    """Per-epoch learning rate: a profile h on [0, 1], constant within an epoch.

    Optional linear warmup over the first ``warmup_epochs`` epochs ramps from
    eta_max/warmup_epochs up to eta_max; the profile then anneals over the
    remaining epochs.
    """

    kind: str = "cosine"
    eta_max: float = 0.1
    epochs: int = 1
    batches: int = 1
    kappa: float = 0.9
    warmup_epochs: int = 0

    def __post_init__(self):
        if self.kind not in LR_KINDS:
            raise ValueError(f"unknown learning-rate kind {self.kind!r}")
        if not self.eta_max > 0:
            raise ValueError("eta_max must be positive")
        if self.epochs < 1 or self.batches < 1:
            raise ValueError("epochs and batches must be at least 1")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if not 0 <= self.warmup_epochs < self.epochs:
            raise ValueError("warmup_epochs must lie in [0, epochs)")

    @property
    def total_steps(self) -> int:
        return self.epochs * self.batches

    def h(self, x):
        """Annealing profile h(x) for x in [0, 1], ignoring warmup."""
        if self.kind == "constant":
            return self.eta_max * np.ones_like(np.asarray(x, dtype=np.float64))
        if self.kind == "cosine":
            return 0.5 * self.eta_max * (1.0 + np.cos(np.pi * np.asarray(x, dtype=np.float64)))
        return self.eta_max * (1.0 - np.asarray(x, dtype=np.float64)) ** self.kappa

    def epoch_eta(self, n: int) -> float:
        """Realized learning rate in epoch n, warmup included."""
        if not 0 <= n < self.epochs:
            raise ValueError(f"epoch index {n} outside [0, {self.epochs})")
        w = self.warmup_epochs
        if n < w:
            return self.eta_max * (n + 1) / w
        return float(self.h((n - w) / (self.epochs - w)))


def lr_at(lr: LearningRateSpec, n: int, b: int) -> float:
    """Learning rate for batch b (1-based) of epoch n; constant within the epoch."""
    if not 0 <= n < lr.epochs:
        raise ValueError(f"epoch index {n} outside [0, {lr.epochs})")
    if not 1 <= b <= lr.batches:
        raise ValueError(f"batch index {b} outside [1, {lr.batches}]")
    return lr.epoch_eta(n)


def eta_at_step(lr: LearningRateSpec, t: int) -> float:
    """Learning rate at flat iteration t = n*B + b."""
    if not 0 <= t < lr.total_steps:
        raise ValueError(f"step {t} outside [0, {lr.total_steps})")
    return lr.epoch_eta(t // lr.batches)


def lr_sequence(lr: LearningRateSpec) -> np.ndarray:
    """Realized learning rate at every iteration t = 0..T-1."""
    per_epoch = np.array([lr.epoch_eta(n) for n in range(lr.epochs)])
    return np.repeat(per_epoch, lr.batches)


@dataclass(frozen=True)
class SchedulerSpec:
    """Declarative threshold schedule.

    final_threshold is the target D reached at t = T (except for ``lats``,
    whose level is derived from mu, and ``str``, whose threshold is the
    sigmoid of a trained logit). d0 is an additive offset applied at t = 0.
    """

    kind: str
    final_threshold: float = 0.0
    d0: float = 0.0
    mu: float = 0.0
    beta: float = 0.5
    s_init: float = -5.0
    str_decay: float = 1e-4
    include_warmup: bool = True

    def __post_init__(self):
        if self.kind not in SCHEDULER_KINDS:
            raise ValueError(f"unknown scheduler kind {self.kind!r}")
        if self.d0 < 0:
            raise ValueError("d0 must be non-negative")
        if self.kind in _D_KINDS:
            if self.final_threshold < self.d0:
                raise ValueError("final_threshold must be at least d0")
        if self.kind == "lats" and self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.kind == "pgh" and not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.kind == "str":
            if not math.isfinite(self.s_init):
                raise ValueError("s_init must be finite")
            if self.str_decay < 0:
                raise ValueError("str_decay must be non-negative")


def lats_threshold_exact(
    lr: LearningRateSpec,
    mu: float,
    d0: float,
    n: int,
    b: int,
    include_warmup: bool = True,
    method: str = "auto",
) -> float:
    """Threshold after b batches of epoch n under a constant implicit penalty mu.

    Accumulates mu times every realized learning rate:

        d = d0 + mu * (b * eta(n) + B * sum_{i<n} eta(i)).

    For the cosine profile without warmup the partial sums have the closed form

        d = d0 + mu * eta_max * (B/4 * (2n + 1 + sin((2n-1)pi/2N) / sin(pi/2N))
                                 + b/2 * (1 + cos(n pi / N))),

    selected automatically; ``method`` forces "closed-form" or "summation".
    """
    if mu < 0 or d0 < 0:
        raise ValueError("mu and d0 must be non-negative")
    if not 0 <= n <= lr.epochs:
        raise ValueError(f"epoch index {n} outside [0, {lr.epochs}]")
    if not 0 <= b <= lr.batches:
        raise ValueError(f"batch count {b} outside [0, {lr.batches}]")
    if n == lr.epochs and b != 0:
        raise ValueError("past the last epoch only b = 0 is defined")

    closed_ok = lr.kind == "cosine" and lr.warmup_epochs == 0
    if method == "auto":
        method = "closed-form" if closed_ok else "summation"
    if method == "closed-form":
        if not closed_ok:
            raise ValueError("closed form requires a cosine profile without warmup")
        big_n = lr.epochs
        epoch_term = 2 * n + 1 + math.sin((2 * n - 1) * math.pi / (2 * big_n)) / math.sin(
            math.pi / (2 * big_n)
        )
        batch_term = 0.5 * b * (1.0 + math.cos(n * math.pi / big_n))
        return d0 + mu * lr.eta_max * (0.25 * lr.batches * epoch_term + batch_term)
    if method != "summation":
        raise ValueError(f"unknown method {method!r}")

    first = lr.warmup_epochs if not include_warmup else 0
    acc = 0.0
    for i in range(first, n):
        acc += lr.batches * lr.epoch_eta(i)
    if n < lr.epochs and (include_warmup or n >= lr.warmup_epochs):
        acc += b * lr.epoch_eta(n)
    return d0 + mu * acc


def slats_threshold(D: float, t: int, T: int, d0: float = 0.0) -> float:
    """Smoothed threshold d(t) = d0 + D * (sin(t pi / T) / pi + t / T).

    The continuous-time relaxation of the cosine-profile accumulation; hits
    d0 at t = 0 and d0 + D at t = T.
    """
    _check_schedule_args(D, t, T, d0)
    x = t / T
    return d0 + D * (math.sin(math.pi * x) / math.pi + x)


def integral_scheduler(
    lr: LearningRateSpec, D: float, t: int, T: int, tol: float = 1e-10, d0: float = 0.0
) -> float:
    """Threshold from the normalized running integral of the lr profile.

    d(t) = d0 + D * int_0^{t/T} h / int_0^1 h, evaluated by adaptive
    quadrature; warmup is not part of the profile and is ignored here.
    """
    _check_schedule_args(D, t, T, d0)
    num = integrate(lambda x: float(lr.h(x)), 0.0, t / T, tol)
    den = integrate(lambda x: float(lr.h(x)), 0.0, 1.0, tol)
    return d0 + D * (num / den)


def _pgh_numerator(log_beta: float, x: float) -> float:
    # expm1 keeps the beta -> 1 limit from cancelling catastrophically.
    em1 = math.expm1(x * log_beta)
    bx = math.exp(x * log_beta)
    pi2 = math.pi * math.pi
    return (
        pi2 * em1
        + log_beta * log_beta * (em1 - 1.0)
        + log_beta * bx * (log_beta * math.cos(math.pi * x) + math.pi * math.sin(math.pi * x))
    )


def pgh_threshold(D: float, beta: float, t: int, T: int, d0: float = 0.0) -> float:
    """Threshold whose growth concentrates early for small beta.

    Normalized running integral of (1/2)(1 + cos(pi x)) * beta^x; beta = 1
    degenerates to the smoothed cosine schedule, beta -> 0 approaches a step
    at the first iteration. beta^x is evaluated as exp(x * ln beta).
    """
    _check_schedule_args(D, t, T, d0)
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if beta == 1.0:
        return slats_threshold(D, t, T, d0)
    if t == T:
        return d0 + D
    log_beta = math.log(beta)
    den = math.pi * math.pi * math.expm1(log_beta) - 2.0 * log_beta * log_beta
    # the ratio is <= 1 exactly; rounding can push it an ulp past that
    frac = min(_pgh_numerator(log_beta, t / T) / den, 1.0)
    return d0 + D * frac


def pgh_derivative(beta: float, x: float) -> float:
    """Slope of the normalized pgh schedule at x = t/T (analytic, not numeric)."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if beta == 1.0:
        return 1.0 + math.cos(math.pi * x)
    log_beta = math.log(beta)
    pi2 = math.pi * math.pi
    den = pi2 * math.expm1(log_beta) - 2.0 * log_beta * log_beta
    num = log_beta * (log_beta * log_beta + pi2) * (1.0 + math.cos(math.pi * x)) * math.exp(
        x * log_beta
    )
    return num / den


def pgh_stop_fraction(beta: float, level: float = 0.1) -> float:
    """Smallest x in (0, 1] where the pgh slope falls below ``level``.

    The slope decreases strictly from its x = 0 value to 0 at x = 1, so the
    crossing is unique; located by bisection on the analytic derivative.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    if pgh_derivative(beta, 0.0) < level:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if pgh_derivative(beta, mid) < level:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def baseline_threshold(kind: str, D: float, t: int, T: int, d0: float = 0.0) -> float:
    """Reference schedules: sine half-wave, linear ramp, base-2 logarithm."""
    _check_schedule_args(D, t, T, d0)
    x = t / T
    if kind == "sine":
        return d0 + D * 0.5 * (1.0 - math.cos(math.pi * x))
    if kind == "linear":
        return d0 + D * x
    if kind == "log2":
        return d0 + D * math.log2(x + 1.0)
    raise ValueError(f"unknown baseline kind {kind!r}")


def _check_schedule_args(D: float, t: int, T: int, d0: float) -> None:
    if D < 0 or d0 < 0:
        raise ValueError("D and d0 must be non-negative")
    if T < 1:
        raise ValueError("T must be at least 1")
    if not 0 <= t <= T:
        raise ValueError(f"step {t} outside [0, {T}]")


def threshold_at(sched: SchedulerSpec, lr: LearningRateSpec, t: int) -> float:
    """Threshold before iteration t's update, for any scheduled kind."""
    T = lr.total_steps
    kind = sched.kind
    if kind == "lats":
        n, b = divmod(t, lr.batches)
        return lats_threshold_exact(lr, sched.mu, sched.d0, n, b, sched.include_warmup)
    if kind == "slats":
        return slats_threshold(sched.final_threshold - sched.d0, t, T, sched.d0)
    if kind == "integral":
        return integral_scheduler(lr, sched.final_threshold - sched.d0, t, T, d0=sched.d0)
    if kind == "pgh":
        return pgh_threshold(sched.final_threshold - sched.d0, sched.beta, t, T, sched.d0)
    if kind in ("sine", "linear", "log2"):
        return baseline_threshold(kind, sched.final_threshold - sched.d0, t, T, sched.d0)
    if kind == "prune-at-init":
        _check_schedule_args(sched.final_threshold - sched.d0, t, T, sched.d0)
        return sched.d0 if t == 0 else sched.final_threshold
    if kind == "str":
        # Gradient-free decay trajectory of the trained logit.
        if not 0 <= t <= T:
            raise ValueError(f"step {t} outside [0, {T}]")
        s = sched.s_init
        for i in range(t):
            s, _ = str_trainable_threshold_step(s, 0.0, eta_at_step(lr, i), sched.str_decay)
        return float(sigmoid(s))
    raise ValueError(f"unknown scheduler kind {kind!r}")


def threshold_sequence(sched: SchedulerSpec, lr: LearningRateSpec) -> np.ndarray:
    """Thresholds d(0), ..., d(T) realized over a full run.

    The lats sequence accumulates mu * eta(t) step by step, matching its
    defining recursion; other kinds are evaluated pointwise.
    """
    T = lr.total_steps
    if sched.kind == "lats":
        etas = lr_sequence(lr)
        if not sched.include_warmup:
            etas = etas.copy()
            etas[: lr.warmup_epochs * lr.batches] = 0.0
        increments = sched.mu * etas
        return sched.d0 + np.concatenate([[0.0], np.cumsum(increments)])
    if sched.kind == "str":
        etas = lr_sequence(lr)
        factors = np.concatenate([[1.0], np.cumprod(1.0 - etas * sched.str_decay)])
        return np.asarray(sigmoid(sched.s_init * factors), dtype=np.float64)
    return np.array([threshold_at(sched, lr, t) for t in range(T + 1)])


@dataclass(frozen=True)
class PenaltyTrace:
    """Implicit l1 penalty per iteration, with zero-lr entries flagged as NaN."""

    values: np.ndarray
    iterations: np.ndarray
    flagged: tuple

    def __len__(self) -> int:
        return len(self.values)


def implicit_penalty(thresholds, lrs) -> PenaltyTrace:
    """Penalty trace mu(t) = (d(t+1) - d(t)) / eta(t) from raw sequences.

    ``thresholds`` covers t = 0..L-1; ``lrs`` must supply at least L-1 rates.
    Steps with eta = 0 carry no implicit penalty coefficient and are flagged.
    """
    d = as_vector(thresholds)
    eta = as_vector(lrs)
    if len(d) < 2:
        raise ValueError("need at least two threshold samples")
    if len(eta) < len(d) - 1:
        raise ValueError("learning-rate sequence shorter than threshold differences")
    eta = eta[: len(d) - 1]
    diffs = np.diff(d)
    values = np.full(len(diffs), np.nan)
    nonzero = eta != 0.0
    values[nonzero] = diffs[nonzero] / eta[nonzero]
    flagged = tuple(int(i) for i in np.nonzero(~nonzero)[0])
    return PenaltyTrace(values=values, iterations=np.arange(len(diffs)), flagged=flagged)


def str_trainable_threshold_step(
    s: float, grad_s: float, eta: float, lam: float
) -> tuple[float, float]:
    """One SGD step on the threshold logit with l2 decay.

    Returns (s', sigmoid(s')) with s' = s - eta * (grad_s + lam * s).
    """
    if eta < 0 or lam < 0:
        raise ValueError("eta and lam must be non-negative")
    s_new = s - eta * (grad_s + lam * s)
    return s_new, float(sigmoid(s_new))
