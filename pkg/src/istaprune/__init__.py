"""Soft-threshold pruning as explicit proximal gradient descent.

Threshold schedules whose forward differences encode an implicit l1 penalty,
a reparameterized pruning trainer, an ISTA solver for l1 least squares, and
a verifier that checks the trainer against the proximal reference step by
step.
"""

from .analysis import (
    EquivalenceReport,
    early_pruning_report,
    penalty_shape_test,
    verify_equivalence,
)
from .core import IntegrationError, integrate, sign, soft_threshold
from .models import Dataset, ModelSpec, gen_sparse_regression, init_params, loss_and_grad
from .schedulers import (
    LearningRateSpec,
    PenaltyTrace,
    SchedulerSpec,
    baseline_threshold,
    implicit_penalty,
    integral_scheduler,
    lats_threshold_exact,
    lr_at,
    pgh_stop_fraction,
    pgh_threshold,
    slats_threshold,
    str_trainable_threshold_step,
    threshold_at,
    threshold_sequence,
)
from .solver import (
    IstaConfig,
    IstaResult,
    LassoProblem,
    ista_step,
    kkt_residual,
    solve_lasso,
    solve_with_continuation,
)
from .trainer import (
    TrainerConfig,
    TrainingDiverged,
    TrainState,
    init,
    run,
    sparsity,
    train_step,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "EquivalenceReport",
    "IntegrationError",
    "IstaConfig",
    "IstaResult",
    "LassoProblem",
    "LearningRateSpec",
    "ModelSpec",
    "PenaltyTrace",
    "SchedulerSpec",
    "TrainState",
    "TrainerConfig",
    "TrainingDiverged",
    "baseline_threshold",
    "early_pruning_report",
    "gen_sparse_regression",
    "implicit_penalty",
    "init",
    "init_params",
    "integral_scheduler",
    "integrate",
    "ista_step",
    "kkt_residual",
    "lats_threshold_exact",
    "loss_and_grad",
    "lr_at",
    "penalty_shape_test",
    "pgh_stop_fraction",
    "pgh_threshold",
    "run",
    "sign",
    "slats_threshold",
    "soft_threshold",
    "solve_lasso",
    "solve_with_continuation",
    "sparsity",
    "str_trainable_threshold_step",
    "threshold_at",
    "threshold_sequence",
    "train_step",
    "verify_equivalence",
]
