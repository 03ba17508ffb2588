"""Service endpoints wrapping the library, one POST per CLI subcommand."""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import artifacts
from ..analysis import early_pruning_report, penalty_shape_test, verify_equivalence
from ..config import hash_text
from ..models import Dataset, ModelSpec, gen_sparse_regression, init_params
from ..schedulers import (
    LearningRateSpec,
    SchedulerSpec,
    implicit_penalty,
    lr_sequence,
    threshold_sequence,
)
from ..solver import IstaConfig, LassoProblem, solve_lasso, solve_with_continuation
from ..trainer import TrainerConfig, TrainingDiverged, run, sparsity
from . import schemas

app = FastAPI(title="istaprune", version="0.1.0")


@app.exception_handler(ValueError)
async def _value_error_handler(request, exc):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.exception_handler(TrainingDiverged)
async def _diverged_handler(request, exc):
    return JSONResponse(status_code=422, content={"detail": f"training diverged: {exc}"})


def _request_hash(req, given: str) -> str:
    if given:
        return given
    payload = req.model_dump(exclude={"config_hash"})
    return hash_text(json.dumps(payload, sort_keys=True))


def _lr_spec(params: schemas.LearningRateParams) -> LearningRateSpec:
    return LearningRateSpec(**params.model_dump())


def _scheduler_spec(params: schemas.SchedulerParams) -> SchedulerSpec:
    return SchedulerSpec(**params.model_dump())


def _dataset(payload: schemas.DatasetPayload) -> Dataset:
    if payload.synthetic is not None:
        if payload.inputs is not None or payload.targets is not None:
            raise ValueError("pass either inline data or a synthetic spec, not both")
        s = payload.synthetic
        data, _ = gen_sparse_regression(s.n_samples, s.n_features, s.k_nonzero, s.noise_std, s.seed)
        return data
    if payload.inputs is None or payload.targets is None:
        raise ValueError("dataset needs inline inputs/targets or a synthetic spec")
    return Dataset(inputs=np.array(payload.inputs), targets=np.array(payload.targets))


@app.post("/schedule", response_model=schemas.ScheduleResponse)
def schedule(req: schemas.ScheduleRequest) -> schemas.ScheduleResponse:
    sched = _scheduler_spec(req.scheduler)
    lr = _lr_spec(req.lr)
    thresholds = threshold_sequence(sched, lr)
    etas = lr_sequence(lr)
    penalties = implicit_penalty(thresholds, etas).values
    config_hash = _request_hash(req, req.config_hash)
    return schemas.ScheduleResponse(
        csv=artifacts.schedule_csv(thresholds, etas, penalties, config_hash),
        config_hash=config_hash,
    )


@app.post("/solve", response_model=schemas.SolveResponse)
def solve(req: schemas.SolveRequest) -> schemas.SolveResponse:
    if req.synthetic is not None:
        if req.matrix is not None or req.rhs is not None:
            raise ValueError("pass either an inline matrix or a synthetic spec, not both")
        s = req.synthetic
        data, _ = gen_sparse_regression(s.n_samples, s.n_features, s.k_nonzero, s.noise_std, s.seed)
        A, b = data.inputs, data.targets
    elif req.matrix is not None and req.rhs is not None:
        A, b = np.array(req.matrix), np.array(req.rhs)
    else:
        raise ValueError("problem needs a matrix and rhs, or a synthetic spec")
    problem = LassoProblem(A=A, b=b, mu=req.mu)
    cfg = IstaConfig(
        step_size=req.step_size,
        max_iters=req.max_iters,
        kkt_tol=req.kkt_tol,
        use_fista=req.fista,
    )
    if req.continuation:
        result = solve_with_continuation(problem, np.array(req.continuation), cfg)
    else:
        result = solve_lasso(problem, cfg)
    return schemas.SolveResponse(
        solution=[float(v) for v in result.x],
        kkt_residual=result.kkt_residual,
        iterations=result.iterations,
        converged=result.converged,
        objective=result.objective,
        step_size=result.step_size,
        config_hash=_request_hash(req, req.config_hash),
    )


def _trainer_setup(req: schemas.TrainRequest):
    sched = _scheduler_spec(req.scheduler)
    lr = _lr_spec(req.lr)
    cfg = TrainerConfig(
        scheduler=sched,
        lr=lr,
        gradient_mode=req.trainer.gradient_mode,
        weight_decay=req.trainer.weight_decay,
        momentum=req.trainer.momentum,
        seed=req.seed,
        record_trace=req.trainer.record_trace,
    )
    data = _dataset(req.data)
    spec = ModelSpec(kind=req.model.kind, n_features=data.n_features, hidden=req.model.hidden)
    w0 = init_params(spec, req.seed, req.init_scale)
    return cfg, spec, data, w0


@app.post("/train", response_model=schemas.TrainResponse)
def train(req: schemas.TrainRequest) -> schemas.TrainResponse:
    cfg, spec, data, w0 = _trainer_setup(req)
    result = run(cfg, spec, data, w0)
    config_hash = _request_hash(req, req.config_hash)
    metrics = artifacts.metrics_csv(
        result.iters,
        result.losses,
        result.sparsities,
        result.thresholds,
        result.penalties,
        config_hash,
    )
    weights = artifacts.weights_text(
        result.weights,
        config_hash,
        meta={"model": spec.kind, "seed": req.seed, "threshold": repr(result.state.d)},
    )
    return schemas.TrainResponse(
        metrics_csv=metrics,
        weights_text=weights,
        final_loss=float(result.losses[-1]),
        final_sparsity=sparsity(result.weights),
        iterations=result.state.t,
        config_hash=config_hash,
    )


@app.post("/verify", response_model=schemas.VerifyResponse)
def verify(req: schemas.VerifyRequest) -> schemas.VerifyResponse:
    cfg, spec, data, w0 = _trainer_setup(req)
    report, _ = verify_equivalence(cfg, spec, data, w0, tol=req.tolerance)
    return schemas.VerifyResponse(
        report=json.loads(report.to_json()),
        passed=report.passed,
        config_hash=_request_hash(req, req.config_hash),
    )


@app.post("/trace", response_model=schemas.TraceResponse)
def trace(req: schemas.TraceRequest) -> schemas.TraceResponse:
    if req.kind == "penalty-shape":
        if req.scheduler is None or req.lr is None:
            raise ValueError("penalty-shape needs scheduler and lr sections")
        report = penalty_shape_test(_scheduler_spec(req.scheduler), _lr_spec(req.lr))
        body = json.loads(report.to_json())
    elif req.kind == "early-pruning":
        lr = _lr_spec(req.lr) if req.lr is not None else None
        report = early_pruning_report(
            req.betas,
            level=req.level,
            lr=lr,
            final_threshold=req.final_threshold,
            seed=req.seed,
        )
        body = json.loads(report.to_json())
    else:
        raise ValueError(f"unknown trace kind {req.kind!r}")
    return schemas.TraceResponse(
        kind=req.kind,
        report=body,
        config_hash=_request_hash(req, req.config_hash),
    )
