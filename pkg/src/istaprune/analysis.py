"""Numerical verification of the training/proximal-step correspondence.

`verify_equivalence` replays a pruning run and checks, step by step and
component by component, that the trainer's update equals an independent
proximal gradient step

    w(t+1) = soft_threshold(w(t) - eta * grad, d(t+1) - d(t) [+ decay term])

whenever that identity's preconditions hold (nonzero weight, threshold
cleared, sign preserved). The reference path goes through the solver's
`ista_step`, not through any trainer code, so the two routes stay
independent. The remaining reports quantify the induced penalty's shape and
where fast schedules stop pruning.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .models import Dataset, ModelSpec, gen_sparse_regression, init_params
from .schedulers import (
    LearningRateSpec,
    SchedulerSpec,
    implicit_penalty,
    lr_sequence,
    pgh_stop_fraction,
    threshold_sequence,
)
from .solver import ista_step
from .trainer import RunResult, TrainerConfig, run


@dataclass
class EquivalenceReport:
    """Per-(step, component) classification of a whole run.

    The three counts partition steps * components. `max_abs_deviation` is
    taken over every pair whose preconditions held, verified or not.
    """

    steps: int
    components: int
    verified_equal: int
    precondition_violated: int
    mismatched: int
    max_abs_deviation: float
    tolerance: float
    weight_decay: float
    decay_threshold_form: str
    unscaled_decay_max_deviation: float | None = None
    mismatch_examples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.mismatched == 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EquivalenceReport":
        return cls(**json.loads(text))


def verify_equivalence(
    cfg: TrainerConfig,
    spec: ModelSpec,
    data: Dataset,
    w0,
    tol: float = 1e-12,
) -> tuple[EquivalenceReport, RunResult]:
    """Train and check every step against the proximal reference in lockstep.

    Requires vanilla SGD (no momentum). With weight decay on, the reference
    shrinkage carries the decay contamination eta * lambda * |theta|, the
    form implied by the implemented update theta' = theta - eta * (g +
    lambda * theta); the report records that choice and how far the
    lr-independent variant (lambda * |theta| alone) drifts on the same run.
    """
    if cfg.momentum != 0.0:
        raise ValueError("the verified path requires vanilla SGD (momentum = 0)")
    if tol < 0:
        raise ValueError("tol must be non-negative")

    lam = cfg.weight_decay
    counts = {"verified": 0, "violated": 0, "mismatched": 0}
    max_dev = 0.0
    unscaled_max_dev = 0.0
    examples: list = []
    steps_seen = 0

    def observer(prev, grad_w, eta, new):
        nonlocal max_dev, unscaled_max_dev, steps_seen
        steps_seen += 1
        theta0, theta1 = prev.theta, new.theta
        shrink = (new.d - prev.d) + eta * lam * np.abs(theta0)
        ok = prev.w != 0.0
        ok &= np.sign(theta1) == np.sign(theta0)
        ok &= np.abs(theta1) > prev.d
        ok &= shrink >= 0.0
        counts["violated"] += int(np.sum(~ok))
        if not np.any(ok):
            return
        reference = ista_step(prev.w, grad_w, eta, shrink / eta)
        dev = np.abs(new.w - reference)[ok]
        max_dev = max(max_dev, float(dev.max()))
        bad = dev > tol
        counts["verified"] += int(np.sum(~bad))
        counts["mismatched"] += int(np.sum(bad))
        if np.any(bad) and len(examples) < 10:
            for i in np.nonzero(ok)[0][bad]:
                if len(examples) >= 10:
                    break
                examples.append(
                    {
                        "t": int(prev.t),
                        "component": int(i),
                        "trainer": float(new.w[i]),
                        "reference": float(reference[i]),
                    }
                )
        if lam > 0:
            alt_shrink = (new.d - prev.d) + lam * np.abs(theta0)
            alt = ista_step(prev.w, grad_w, eta, alt_shrink / eta)
            unscaled_max_dev = max(unscaled_max_dev, float(np.abs(new.w - alt)[ok].max()))

    result = run(cfg, spec, data, w0, observer=observer)
    report = EquivalenceReport(
        steps=steps_seen,
        components=len(result.state.theta),
        verified_equal=counts["verified"],
        precondition_violated=counts["violated"],
        mismatched=counts["mismatched"],
        max_abs_deviation=max_dev,
        tolerance=tol,
        weight_decay=lam,
        decay_threshold_form="eta-scaled" if lam > 0 else "none",
        unscaled_decay_max_deviation=unscaled_max_dev if lam > 0 else None,
        mismatch_examples=examples,
    )
    return report, result


@dataclass
class PenaltyShapeReport:
    applicable: bool
    message: str
    fitted_scale: float | None = None
    max_relative_deviation: float | None = None
    fit_window: tuple = (0.1, 0.9)
    tail_diverges: bool | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def penalty_shape_test(
    sched: SchedulerSpec,
    lr: LearningRateSpec,
    fit_window: tuple = (0.1, 0.9),
) -> PenaltyShapeReport:
    """Check that a sine schedule under cosine lr induces a tan-shaped penalty.

    Fits mu(t) ~ C * tan(t pi / 2T) by least squares over the window and
    reports the worst relative deviation inside it. The trace blows up as
    t -> T, so the tail is flagged rather than fitted. Schedules with a
    constant induced penalty are rejected as inapplicable.
    """
    if lr.kind != "cosine" or lr.warmup_epochs != 0:
        raise ValueError("the shape test requires a cosine lr profile without warmup")
    if sched.kind in ("lats", "slats"):
        return PenaltyShapeReport(
            applicable=False,
            message="constant penalty, tan fit inapplicable",
            fit_window=tuple(fit_window),
        )
    if sched.kind != "sine":
        return PenaltyShapeReport(
            applicable=False,
            message=f"tan shape is specific to the sine schedule, got {sched.kind!r}",
            fit_window=tuple(fit_window),
        )
    lo, hi = fit_window
    if not 0.0 <= lo < hi < 1.0:
        raise ValueError("fit_window must satisfy 0 <= lo < hi < 1")

    T = lr.total_steps
    trace = implicit_penalty(threshold_sequence(sched, lr), lr_sequence(lr)).values
    t = np.arange(T)
    window = (t >= lo * T) & (t <= hi * T)
    x = np.tan(t[window] * math.pi / (2 * T))
    y = trace[window]
    scale = float(np.sum(x * y) / np.sum(x * x))
    rel_dev = float(np.max(np.abs(y - scale * x) / (scale * x)))
    window_end = scale * math.tan(hi * math.pi / 2)
    return PenaltyShapeReport(
        applicable=True,
        message="fitted",
        fitted_scale=scale,
        max_relative_deviation=rel_dev,
        fit_window=(lo, hi),
        tail_diverges=bool(trace[-1] > 3.0 * window_end),
    )


@dataclass
class EarlyPruningRow:
    beta: float
    stop_fraction: float
    threshold_at_stop: float
    final_threshold: float
    post_stop_growth: float
    threshold_frozen: bool


@dataclass
class EarlyPruningReport:
    level: float
    final_target: float
    rows: list

    def to_json(self) -> str:
        return json.dumps(
            {
                "level": self.level,
                "final_target": self.final_target,
                "rows": [asdict(r) for r in self.rows],
            },
            indent=2,
        )


def early_pruning_report(
    betas,
    level: float = 0.1,
    lr: LearningRateSpec | None = None,
    final_threshold: float = 0.4,
    seed: int = 0,
) -> EarlyPruningReport:
    """Where each pgh schedule stops pruning, demonstrated on a real run.

    For each beta the analytic stop fraction is computed, then a small
    seeded regression run realizes the schedule and the threshold growth
    after the stop point is measured as a fraction of the final target D.
    "Frozen" means that growth stays under 5% of D.
    """
    if lr is None:
        lr = LearningRateSpec(kind="cosine", eta_max=0.05, epochs=20, batches=3)
    T = lr.total_steps
    data, _ = gen_sparse_regression(60, 30, 5, noise_std=0.01, seed=seed)
    spec = ModelSpec(kind="linear", n_features=30)
    rows = []
    for beta in betas:
        frac = pgh_stop_fraction(beta, level)
        sched = SchedulerSpec(kind="pgh", final_threshold=final_threshold, beta=beta)
        cfg = TrainerConfig(scheduler=sched, lr=lr, seed=seed)
        result = run(cfg, spec, data, init_params(spec, seed + 1))
        t_stop = min(int(math.ceil(frac * T)), T)
        idx = int(np.searchsorted(result.iters, max(t_stop, 1)))
        at_stop = float(result.thresholds[idx])
        final = float(result.thresholds[-1])
        growth = (final - at_stop) / final_threshold
        rows.append(
            EarlyPruningRow(
                beta=float(beta),
                stop_fraction=frac,
                threshold_at_stop=at_stop,
                final_threshold=final,
                post_stop_growth=growth,
                threshold_frozen=bool(growth < 0.05),
            )
        )
    return EarlyPruningReport(level=level, final_target=final_threshold, rows=rows)
