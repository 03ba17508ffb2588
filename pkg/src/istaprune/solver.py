"""Proximal gradient descent for l1-regularized least squares.

Minimizes F(x) = 0.5 * ||A x - b||^2 + mu * ||x||_1 by forward gradient
steps composed with soft thresholding. With eta <= 1 / lambda_max(A^T A)
the objective descends monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import as_vector, soft_threshold


@dataclass(frozen=True)
class LassoProblem:
    A: np.ndarray
    b: np.ndarray
    mu: float

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("A must be a 2-D matrix")
        if not np.all(np.isfinite(A)):
            raise ValueError("A entries must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", as_vector(self.b))
        if len(self.b) != A.shape[0]:
            raise ValueError("b length must match the row count of A")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")

    @property
    def n_features(self) -> int:
        return self.A.shape[1]

    def smooth_grad(self, x: np.ndarray) -> np.ndarray:
        return self.A.T @ (self.A @ x - self.b)

    def objective(self, x: np.ndarray) -> float:
        r = self.A @ x - self.b
        return 0.5 * float(r @ r) + self.mu * float(np.sum(np.abs(x)))


@dataclass(frozen=True)
class IstaConfig:
    step_size: float | None = None  # None: 1 / L with L estimated by power iteration
    max_iters: int | None = None  # None: 100 * n_features
    kkt_tol: float = 1e-8
    use_fista: bool = False

    def __post_init__(self):
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.kkt_tol <= 0:
            raise ValueError("kkt_tol must be positive")


@dataclass
class IstaResult:
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    step_size: float
    objectives: np.ndarray = field(repr=False)


def ista_step(x, grad, eta: float, mu) -> np.ndarray:
    """One proximal gradient step: soft_threshold(x - eta * grad, mu * eta).

    mu may be a scalar or a per-component array of penalty coefficients.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    mu = np.asarray(mu, dtype=np.float64)
    if np.any(mu < 0):
        raise ValueError("mu must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    return soft_threshold(x - eta * grad, mu * eta)


def lipschitz_estimate(A: np.ndarray, iters: int = 30, safety: float = 1.01) -> float:
    """Largest eigenvalue of A^T A by power iteration, inflated by ``safety``.

    Power iteration approaches the top eigenvalue from below, so the safety
    factor keeps 1 / L a valid descent step. Deterministic start vector.
    """
    n = A.shape[1]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            # Start vector annihilated; any unit step is safe then.
            return 1.0
        v = w / lam
    return safety * lam


def kkt_residual(p: LassoProblem, x) -> float:
    """Max violation of the stationarity conditions at x.

    On the support: |grad f + mu * sign(x)|; off the support:
    max(0, |grad f| - mu). Zero at an exact minimizer.
    """
    x = as_vector(x)
    g = p.smooth_grad(x)
    on = x != 0.0
    res_on = np.abs(g[on] + p.mu * np.sign(x[on]))
    res_off = np.maximum(np.abs(g[~on]) - p.mu, 0.0)
    worst = 0.0
    if res_on.size:
        worst = max(worst, float(res_on.max()))
    if res_off.size:
        worst = max(worst, float(res_off.max()))
    return worst


def solve_lasso(p: LassoProblem, cfg: IstaConfig = IstaConfig(), x0=None) -> IstaResult:
    """Run proximal gradient iterations until the KKT residual meets kkt_tol.

    Starts from x0 (zeros by default). Plain iterations descend monotonically
    in the objective; use_fista adds momentum and gives up monotonicity, so
    the best iterate seen is returned either way.
    """
    eta = cfg.step_size if cfg.step_size is not None else 1.0 / lipschitz_estimate(p.A)
    max_iters = cfg.max_iters if cfg.max_iters is not None else 100 * p.n_features
    x = np.zeros(p.n_features) if x0 is None else as_vector(x0).copy()

    best_x = x.copy()
    best_obj = p.objective(x)
    objectives = [best_obj]
    initial_kkt = kkt_residual(p, x)
    if initial_kkt <= cfg.kkt_tol:
        return IstaResult(
            x=x,
            objective=best_obj,
            kkt_residual=initial_kkt,
            iterations=0,
            converged=True,
            step_size=eta,
            objectives=np.array(objectives),
        )
    y = x.copy()
    momentum = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        if cfg.use_fista:
            x_next = ista_step(y, p.smooth_grad(y), eta, p.mu)
            momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum**2))
            y = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x)
            momentum = momentum_next
        else:
            x_next = ista_step(x, p.smooth_grad(x), eta, p.mu)
        x = x_next
        obj = p.objective(x)
        objectives.append(obj)
        if obj < best_obj:
            best_obj = obj
            best_x = x.copy()
        if kkt_residual(p, x) <= cfg.kkt_tol:
            converged = True
            break

    final_x = x if not cfg.use_fista else best_x
    return IstaResult(
        x=final_x,
        objective=p.objective(final_x),
        kkt_residual=kkt_residual(p, final_x),
        iterations=iterations,
        converged=converged,
        step_size=eta,
        objectives=np.array(objectives),
    )


def solve_with_continuation(
    p: LassoProblem, mu_schedule, cfg: IstaConfig = IstaConfig()
) -> IstaResult:
    """Warm-started homotopy over a decreasing penalty sequence ending at p.mu.

    Each stage solves the problem at one mu from the previous stage's
    solution; the returned result is the final stage's.
    """
    schedule = as_vector(mu_schedule)
    if len(schedule) == 0:
        raise ValueError("mu_schedule must be non-empty")
    if np.any(np.diff(schedule) > 0):
        raise ValueError("mu_schedule must be non-increasing")
    if not np.isclose(schedule[-1], p.mu, rtol=1e-12, atol=0.0):
        raise ValueError("mu_schedule must end at the problem's mu")

    x = np.zeros(p.n_features)
    total_iters = 0
    result = None
    for mu in schedule:
        stage = LassoProblem(p.A, p.b, float(mu))
        result = solve_lasso(stage, cfg, x0=x)
        x = result.x
        total_iters += result.iterations
    result.iterations = total_iters
    return result
