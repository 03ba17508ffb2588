"""Acceptance checklist: the eleven end-to-end claims this library is built on.

Each criterion is one self-contained test that prints a single [PASS] line
once its assertions hold.  Running the file directly executes the criteria
in order and prints [FAIL] lines for any that do not hold:

    python3 tests/test_acceptance.py
"""

import contextlib
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

import istaprune as ip
from istaprune import cli
from istaprune.models import n_params
from istaprune.schedulers import lr_sequence
from oracles import cd_lasso, finite_diff_grad, soft_threshold_ref


def test_criterion_01_masked_run_matches_proximal_recursion():
    # 50-dim sparse regression, 2000 steps, vanilla SGD, no weight decay:
    # every live component must match the proximal reference in lockstep.
    start = time.perf_counter()
    data, _ = ip.gen_sparse_regression(200, 50, 8, 0.05, seed=101)
    spec = ip.ModelSpec(kind="linear", n_features=50)
    cfg = ip.TrainerConfig(
        scheduler=ip.SchedulerSpec(kind="slats", final_threshold=0.4),
        lr=ip.LearningRateSpec(kind="cosine", eta_max=0.1, epochs=500, batches=4),
        seed=7,
    )
    w0 = ip.init_params(spec, 8)
    report, _ = ip.verify_equivalence(cfg, spec, data, w0, tol=1e-12)
    elapsed = time.perf_counter() - start

    assert report.steps == 2000
    assert report.components == 50
    assert report.mismatched == 0
    assert report.passed
    total = report.verified_equal + report.precondition_violated + report.mismatched
    assert total == report.steps * report.components
    assert report.max_abs_deviation <= 1e-12
    assert elapsed < 10.0
    print(
        "[PASS] criterion 1: masked-SGD run matches the proximal recursion "
        f"at every step (max dev {report.max_abs_deviation:.2e}, {elapsed:.2f}s)"
    )


def test_criterion_02_implicit_penalty_round_trip():
    # A cumulative schedule built from constant mu must hand that mu back.
    for mu in (0.1, 1.0, 10.0):
        for lr in (
            ip.LearningRateSpec(kind="cosine", eta_max=0.1, epochs=25, batches=4),
            ip.LearningRateSpec(kind="constant", eta_max=0.1, epochs=25, batches=4),
        ):
            sched = ip.SchedulerSpec(kind="lats", mu=mu)
            trace = ip.implicit_penalty(
                ip.threshold_sequence(sched, lr), lr_sequence(lr)
            )
            assert trace.flagged == ()
            np.testing.assert_allclose(trace.values, mu, rtol=1e-12, atol=0)

    # Dyadic rates make the division exact, so the round trip is bitwise.
    lr = ip.LearningRateSpec(kind="constant", eta_max=0.25, epochs=25, batches=4)
    trace = ip.implicit_penalty(
        ip.threshold_sequence(ip.SchedulerSpec(kind="lats", mu=1.0), lr),
        lr_sequence(lr),
    )
    assert np.all(trace.values == 1.0)
    print(
        "[PASS] criterion 2: cumulative schedules return their constant "
        "penalty through implicit_penalty (dyadic case bitwise)"
    )


def test_criterion_03_closed_form_equals_summation():
    mu, d0 = 0.7, 0.0
    worst = 0.0
    for epochs in (1, 2, 10, 100):
        for batches in (1, 4, 50):
            lr = ip.LearningRateSpec(
                kind="cosine", eta_max=0.1, epochs=epochs, batches=batches
            )
            points = [(n, b) for n in range(epochs) for b in range(batches)]
            points.append((epochs, 0))
            for n, b in points:
                closed = ip.lats_threshold_exact(lr, mu, d0, n, b, method="closed-form")
                summed = ip.lats_threshold_exact(lr, mu, d0, n, b, method="summation")
                rel = abs(closed - summed) / max(abs(summed), 1e-300)
                worst = max(worst, rel)
    assert worst <= 1e-10
    print(
        "[PASS] criterion 3: closed-form cumulative threshold equals the "
        f"learning-rate summation on the full epoch grid (worst rel {worst:.2e})"
    )


def test_criterion_04_sine_plus_linear_endpoints_and_integral():
    D, T = 0.4, 1000
    assert ip.slats_threshold(D, 0, T) == 0.0
    assert ip.slats_threshold(D, T, T) == D
    midpoint = ip.slats_threshold(D, T // 2, T) / D
    assert abs(midpoint - (1.0 / np.pi + 0.5)) <= 1e-12

    # The normalized cosine integral must land on the same curve.
    lr = ip.LearningRateSpec(kind="cosine", eta_max=0.1, epochs=100, batches=10)
    worst = 0.0
    for t in range(0, T + 1, 10):
        dev = abs(ip.integral_scheduler(lr, D, t, T) - ip.slats_threshold(D, t, T))
        worst = max(worst, dev)
    assert worst <= 1e-9
    print(
        "[PASS] criterion 4: sine-plus-linear endpoints, midpoint, and "
        f"integral route agree (worst integral dev {worst:.2e})"
    )


def test_criterion_05_ramp_slope_stop_fractions():
    start = time.perf_counter()
    expected = {0.1: 0.743, 1e-5: 0.382, 1e-10: 0.231}
    got = {beta: ip.pgh_stop_fraction(beta, level=0.1) for beta in expected}
    elapsed = time.perf_counter() - start
    for beta, ref in expected.items():
        assert abs(got[beta] - ref) <= 1e-3
    assert elapsed < 1.0
    print(
        "[PASS] criterion 5: ramp-slope stop fractions hit "
        f"{got[0.1]:.3f} / {got[1e-5]:.3f} / {got[1e-10]:.3f} within 1e-3"
    )


def test_criterion_06_exponential_ramp_limits():
    # beta -> 1 recovers the sine-plus-linear curve.
    xs = np.linspace(0.0, 1.0, 1000)
    sup = max(
        abs(ip.pgh_threshold(1.0, 1.0 - 1e-6, x, 1.0) - ip.slats_threshold(1.0, x, 1.0))
        for x in xs
    )
    assert sup < 1e-4

    # beta -> 0 recovers the prune-at-init step schedule.
    lr = ip.LearningRateSpec(kind="cosine", eta_max=0.1, epochs=10, batches=4)
    T = lr.total_steps
    step = ip.threshold_sequence(
        ip.SchedulerSpec(kind="prune-at-init", final_threshold=0.4), lr
    )
    worst = max(
        abs(step[t] - ip.pgh_threshold(0.4, 1e-300, t, T)) for t in range(T + 1)
    )
    assert worst <= 1e-6
    print(
        "[PASS] criterion 6: exponential ramp limits recover the "
        f"sine-plus-linear ({sup:.2e}) and step ({worst:.2e}) schedules"
    )


def test_criterion_07_sine_schedule_tangent_penalty_shape():
    report = ip.penalty_shape_test(
        ip.SchedulerSpec(kind="sine", final_threshold=0.4),
        ip.LearningRateSpec(kind="cosine", eta_max=0.1, epochs=1000, batches=1),
    )
    assert report.applicable
    assert report.max_relative_deviation < 0.01
    print(
        "[PASS] criterion 7: sine schedule's induced penalty fits the "
        f"tangent shape within {100 * report.max_relative_deviation:.2f}% over "
        f"t/T in [{report.fit_window[0]}, {report.fit_window[1]}]"
    )


def test_criterion_08_proximal_solver_correctness():
    rng = np.random.default_rng(3)

    # Orthonormal design: the one-step shrinkage of the correlations is the
    # exact optimum.
    Q, _ = np.linalg.qr(rng.standard_normal((20, 20)))
    b = rng.standard_normal(20)
    res = ip.solve_lasso(ip.LassoProblem(Q, b, 0.3), ip.IstaConfig(step_size=1.0))
    assert res.converged
    closed = soft_threshold_ref(Q.T @ b, 0.3)
    assert np.max(np.abs(res.x - closed)) <= 1e-10

    # Random wide design against an independent coordinate-descent solve.
    data, _ = ip.gen_sparse_regression(20, 50, 5, 0.0, seed=0)
    A, y = data.inputs, data.targets
    p = ip.LassoProblem(A, y, 0.1)
    res = ip.solve_lasso(p, ip.IstaConfig(max_iters=200000, kkt_tol=1e-10))
    assert res.converged
    x_cd = cd_lasso(A, y, 0.1)
    l2 = float(np.linalg.norm(res.x - x_cd))
    assert l2 <= 1e-6

    # Penalty at or above the max correlation leaves the zero vector optimal.
    mu_max = float(np.max(np.abs(A.T @ y)))
    res_null = ip.solve_lasso(ip.LassoProblem(A, y, mu_max))
    assert res_null.converged
    assert np.all(res_null.x == 0.0)

    # At the exact inverse curvature step the objective never increases.
    L = float(np.linalg.eigvalsh(A.T @ A)[-1])
    res_desc = ip.solve_lasso(p, ip.IstaConfig(step_size=1.0 / L, max_iters=20000))
    assert np.all(np.diff(res_desc.objectives) <= 1e-12)
    print(
        "[PASS] criterion 8: solver reproduces the orthonormal closed form, "
        f"matches coordinate descent (l2 {l2:.2e}), nulls out at mu_max, and "
        "descends monotonically"
    )


def test_criterion_09_model_gradients_match_finite_differences():
    # Per-coordinate agreement at 20 random points per model.  The 1e-4
    # denominator floor keeps coordinates at the finite-difference noise
    # floor (~1e-10 absolute) from being scored as relative error.
    data, _ = ip.gen_sparse_regression(40, 12, 4, 0.05, seed=9)
    binary = ip.Dataset(
        inputs=data.inputs, targets=(data.targets > 0).astype(np.float64)
    )
    worst = {}
    for kind in ("linear", "logistic", "mlp2"):
        spec = ip.ModelSpec(kind=kind, n_features=12, hidden=6)
        d = binary if kind == "logistic" else data
        rng = np.random.default_rng(2024)
        worst[kind] = 0.0
        for _ in range(20):
            w = rng.standard_normal(n_params(spec)) * 0.7
            _, g = ip.loss_and_grad(spec, w, d, None)
            fd = finite_diff_grad(lambda v: ip.loss_and_grad(spec, v, d, None)[0], w)
            rel = np.abs(g - fd) / np.maximum(np.maximum(np.abs(fd), np.abs(g)), 1e-4)
            worst[kind] = max(worst[kind], float(rel.max()))
        assert worst[kind] <= 1e-5
    print(
        "[PASS] criterion 9: all three model gradients pass central "
        "finite-difference checks (worst rel "
        f"{max(worst.values()):.2e} at {max(worst, key=worst.get)})"
    )


def test_criterion_10_sparsity_monotone_and_support_recovery():
    start = time.perf_counter()
    data, w_true = ip.gen_sparse_regression(100, 50, 5, 0.01, seed=42)
    planted = set(np.flatnonzero(w_true).tolist())
    spec = ip.ModelSpec(kind="linear", n_features=50)
    lr = ip.LearningRateSpec(kind="cosine", eta_max=0.05, epochs=60, batches=4)
    w0 = ip.init_params(spec, 17, scale=0.5)

    grid = (0.0, 0.1, 0.3, 1.0, 2.0)
    sparsities, supports = [], []
    for D in grid:
        cfg = ip.TrainerConfig(
            scheduler=ip.SchedulerSpec(kind="slats", final_threshold=D),
            lr=lr,
            seed=5,
        )
        res = ip.run(cfg, spec, data, w0)
        sparsities.append(ip.sparsity(res.weights))
        supports.append(set(np.flatnonzero(res.weights).tolist()))
    elapsed = time.perf_counter() - start

    assert all(b >= a for a, b in zip(sparsities, sparsities[1:]))
    assert sparsities[-1] > sparsities[0]
    # The largest grid threshold is the recovery point for this problem.
    assert planted.issubset(supports[-1])
    assert elapsed < 30.0
    print(
        "[PASS] criterion 10: final sparsity is monotone over the threshold "
        f"grid {[round(s, 2) for s in sparsities]} and the planted support is "
        f"recovered ({len(supports[-1])} live of 50, {elapsed:.1f}s)"
    )


def test_criterion_11_byte_identical_artifacts():
    args = (
        "train",
        "--seed=5",
        "--lr.epochs=4",
        "--lr.batches=2",
        "--scheduler.final_threshold=0.3",
        "--data.n_samples=30",
        "--data.n_features=8",
        "--data.k_nonzero=2",
        "--data.seed=9",
    )
    with tempfile.TemporaryDirectory() as tmp:
        runs = []
        for tag in ("a", "b"):
            m = Path(tmp) / f"metrics_{tag}.csv"
            w = Path(tmp) / f"weights_{tag}.txt"
            with contextlib.redirect_stdout(io.StringIO()):
                code = cli.main([*args, "--output", str(m), "--weights", str(w)])
            assert code == 0
            runs.append((m.read_bytes(), w.read_bytes()))
    assert runs[0] == runs[1]
    assert len(runs[0][0]) > 0 and len(runs[0][1]) > 0
    print(
        "[PASS] criterion 11: identical config and seed produce byte-identical "
        "metrics and weight files"
    )


CRITERIA = (
    test_criterion_01_masked_run_matches_proximal_recursion,
    test_criterion_02_implicit_penalty_round_trip,
    test_criterion_03_closed_form_equals_summation,
    test_criterion_04_sine_plus_linear_endpoints_and_integral,
    test_criterion_05_ramp_slope_stop_fractions,
    test_criterion_06_exponential_ramp_limits,
    test_criterion_07_sine_schedule_tangent_penalty_shape,
    test_criterion_08_proximal_solver_correctness,
    test_criterion_09_model_gradients_match_finite_differences,
    test_criterion_10_sparsity_monotone_and_support_recovery,
    test_criterion_11_byte_identical_artifacts,
)


def main() -> int:
    failures = 0
    for number, criterion in enumerate(CRITERIA, start=1):
        try:
            criterion()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"[FAIL] criterion {number}: {exc!r}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
