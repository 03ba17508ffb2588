"""Artifact text formats.

Every CSV or weight-vector artifact starts with a ``# config_hash=...``
comment line tying it to the resolved configuration that produced it; equal
hashes must mean byte-identical files. Floats are written with repr, the
shortest round-tripping form.
"""

from __future__ import annotations

import numpy as np

SCHEDULE_HEADER = "iter,threshold,lr,penalty"
METRICS_HEADER = "iter,loss,sparsity,threshold,penalty"


def _f(value) -> str:
    return repr(float(value))


def schedule_csv(thresholds, lrs, penalties, config_hash: str) -> str:
    """Rows for t = 0..T; lr and penalty are empty on the final row."""
    T = len(thresholds) - 1
    if len(lrs) != T or len(penalties) != T:
        raise ValueError("need exactly one lr and one penalty per step")
    lines = [f"# config_hash={config_hash}", SCHEDULE_HEADER]
    for t in range(T):
        penalty = _f(penalties[t]) if np.isfinite(penalties[t]) else "nan"
        lines.append(f"{t},{_f(thresholds[t])},{_f(lrs[t])},{penalty}")
    lines.append(f"{T},{_f(thresholds[T])},,")
    return "\n".join(lines) + "\n"


def metrics_csv(iters, losses, sparsities, thresholds, penalties, config_hash: str) -> str:
    lines = [f"# config_hash={config_hash}", METRICS_HEADER]
    for i in range(len(iters)):
        lines.append(
            f"{int(iters[i])},{_f(losses[i])},{_f(sparsities[i])},"
            f"{_f(thresholds[i])},{_f(penalties[i])}"
        )
    return "\n".join(lines) + "\n"


def weights_text(w, config_hash: str, meta: dict | None = None) -> str:
    """Flat weight vector, one repr per line, preceded by a small header."""
    w = np.asarray(w, dtype=np.float64)
    lines = [f"# config_hash={config_hash}", f"# dim={len(w)}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.extend(_f(v) for v in w)
    return "\n".join(lines) + "\n"


def parse_weights(text: str) -> np.ndarray:
    """Inverse of weights_text; the dim header guards against truncation."""
    dim = None
    values = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            if line.startswith("# dim="):
                dim = int(line[len("# dim=") :])
            continue
        values.append(float(line))
    if dim is not None and dim != len(values):
        raise ValueError(f"weight file declares dim={dim} but holds {len(values)} values")
    return np.array(values, dtype=np.float64)
