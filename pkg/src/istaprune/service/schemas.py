"""Request and response bodies for the service endpoints."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LearningRateParams(StrictModel):
    kind: str = "cosine"
    eta_max: float = 0.1
    epochs: int = 1
    batches: int = 1
    kappa: float = 0.9
    warmup_epochs: int = 0


class SchedulerParams(StrictModel):
    kind: str = "slats"
    final_threshold: float = 0.0
    d0: float = 0.0
    mu: float = 0.0
    beta: float = 0.5
    s_init: float = -5.0
    str_decay: float = 1e-4
    include_warmup: bool = True


class ScheduleRequest(StrictModel):
    scheduler: SchedulerParams
    lr: LearningRateParams
    config_hash: str = ""


class ScheduleResponse(StrictModel):
    csv: str
    config_hash: str


class SyntheticDataParams(StrictModel):
    n_samples: int = 100
    n_features: int = 50
    k_nonzero: int = 5
    noise_std: float = 0.05
    seed: int = 0


class DatasetPayload(StrictModel):
    inputs: list[list[float]] | None = None
    targets: list[float] | None = None
    synthetic: SyntheticDataParams | None = None


class ModelParams(StrictModel):
    kind: str = "linear"
    hidden: int = 8


class TrainerParams(StrictModel):
    gradient_mode: str = "stds-identity"
    weight_decay: float = 0.0
    momentum: float = 0.0
    record_trace: bool = True


class TrainRequest(StrictModel):
    scheduler: SchedulerParams
    lr: LearningRateParams
    trainer: TrainerParams = TrainerParams()
    model: ModelParams = ModelParams()
    data: DatasetPayload = DatasetPayload()
    seed: int = 0
    init_scale: float = 1.0
    config_hash: str = ""


class TrainResponse(StrictModel):
    metrics_csv: str
    weights_text: str
    final_loss: float
    final_sparsity: float
    iterations: int
    config_hash: str


class VerifyRequest(TrainRequest):
    tolerance: float = 1e-12


class VerifyResponse(StrictModel):
    report: dict
    passed: bool
    config_hash: str


class SolveRequest(StrictModel):
    matrix: list[list[float]] | None = None
    rhs: list[float] | None = None
    synthetic: SyntheticDataParams | None = None
    mu: float = 0.1
    step_size: float | None = None
    max_iters: int | None = None
    kkt_tol: float = 1e-8
    fista: bool = False
    continuation: list[float] | None = None
    config_hash: str = ""


class SolveResponse(StrictModel):
    solution: list[float]
    kkt_residual: float
    iterations: int
    converged: bool
    objective: float
    step_size: float
    config_hash: str


class TraceRequest(StrictModel):
    kind: str = "penalty-shape"
    scheduler: SchedulerParams | None = None
    lr: LearningRateParams | None = None
    betas: list[float] = [0.1, 1e-5, 1e-10]
    level: float = 0.1
    final_threshold: float = 0.4
    seed: int = 0
    config_hash: str = ""


class TraceResponse(StrictModel):
    kind: str
    report: dict
    config_hash: str
