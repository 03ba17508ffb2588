"""Flat key-value experiment configuration.

Config files hold one dotted ``key=value`` pair per line ('#' comments and
blank lines allowed); CLI flags use the same keys. Every key is declared in
the registry below with its type and default; unknown keys are rejected.
The canonical serialization of a resolved config (sorted keys, repr floats)
is hashed into the artifact header so a rerun can be matched to its inputs.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

SEED_ENV_VAR = "ISTAPRUNE_SEED"


class ConfigError(ValueError):
    """Bad config file, unknown key, or unparseable value."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {text!r}") from exc


def _parse_float(text: str) -> float:
    try:
        return float(text.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {text!r}") from exc


def _parse_float_or_auto(text: str):
    if text.strip().lower() == "auto":
        return None
    return _parse_float(text)


def _parse_float_list(text: str) -> tuple:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ConfigError("expected a comma-separated list of numbers")
    return tuple(_parse_float(part) for part in items)


def _parse_str(text: str) -> str:
    return text.strip()


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


# key -> (parser, default). Defaults given as callables are resolved lazily.
_REGISTRY = {
    "seed": (_parse_int, _default_seed),
    "lr.kind": (_parse_str, "cosine"),
    "lr.eta_max": (_parse_float, 0.1),
    "lr.epochs": (_parse_int, 1),
    "lr.batches": (_parse_int, 1),
    "lr.kappa": (_parse_float, 0.9),
    "lr.warmup_epochs": (_parse_int, 0),
    "scheduler.kind": (_parse_str, "slats"),
    "scheduler.final_threshold": (_parse_float, 0.0),
    "scheduler.d0": (_parse_float, 0.0),
    "scheduler.mu": (_parse_float, 0.0),
    "scheduler.beta": (_parse_float, 0.5),
    "scheduler.s_init": (_parse_float, -5.0),
    "scheduler.str_decay": (_parse_float, 1e-4),
    "scheduler.include_warmup": (_parse_bool, True),
    "trainer.gradient_mode": (_parse_str, "stds-identity"),
    "trainer.weight_decay": (_parse_float, 0.0),
    "trainer.momentum": (_parse_float, 0.0),
    "trainer.record_trace": (_parse_bool, True),
    "model.kind": (_parse_str, "linear"),
    "model.hidden": (_parse_int, 8),
    "data.file": (_parse_str, ""),
    "data.n_samples": (_parse_int, 100),
    "data.n_features": (_parse_int, 50),
    "data.k_nonzero": (_parse_int, 5),
    "data.noise_std": (_parse_float, 0.05),
    "data.seed": (_parse_int, 0),
    "init.scale": (_parse_float, 1.0),
    "solve.mu": (_parse_float, 0.1),
    "solve.step_size": (_parse_float_or_auto, None),
    "solve.max_iters": (_parse_int, 0),
    "solve.kkt_tol": (_parse_float, 1e-8),
    "solve.fista": (_parse_bool, False),
    "solve.continuation": (_parse_float_list, ()),
    "problem.file": (_parse_str, ""),
    "problem.n_samples": (_parse_int, 20),
    "problem.n_features": (_parse_int, 50),
    "problem.k_nonzero": (_parse_int, 5),
    "problem.noise_std": (_parse_float, 0.0),
    "problem.seed": (_parse_int, 0),
    "trace.kind": (_parse_str, "penalty-shape"),
    "trace.betas": (_parse_float_list, (0.1, 1e-5, 1e-10)),
    "trace.level": (_parse_float, 0.1),
    "verify.tolerance": (_parse_float, 1e-12),
}

_COMMAND_SECTIONS = {
    "schedule": ("lr.", "scheduler."),
    "solve": ("solve.", "problem."),
    "train": ("seed", "lr.", "scheduler.", "trainer.", "model.", "data.", "init."),
    "verify": ("seed", "lr.", "scheduler.", "trainer.", "model.", "data.", "init.", "verify."),
    "trace": ("seed", "lr.", "scheduler.", "trace."),
}


def command_keys(command: str) -> tuple:
    """All registry keys a command accepts."""
    if command not in _COMMAND_SECTIONS:
        raise ConfigError(f"unknown command {command!r}")
    prefixes = _COMMAND_SECTIONS[command]
    return tuple(
        key
        for key in _REGISTRY
        if key in prefixes or any(key.startswith(p) for p in prefixes if p.endswith("."))
    )


def parse_config_file(path: str) -> dict:
    """Read raw key=value pairs; duplicates within one file are rejected."""
    raw: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings for one command, every accepted key present."""

    command: str
    values: dict

    def canonical_text(self) -> str:
        lines = [f"{key}={_format_value(self.values[key])}" for key in sorted(self.values)]
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hash_text(self.canonical_text())

    def nested(self) -> dict:
        """Group dotted keys into sections: {"lr.kind": x} -> {"lr": {"kind": x}}."""
        out: dict = {}
        for key, value in self.values.items():
            if "." in key:
                section, name = key.split(".", 1)
                out.setdefault(section, {})[name] = value
            else:
                out[key] = value
        return out


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    return str(value)


def hash_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def resolve(command: str, raw: dict) -> ExperimentConfig:
    """Validate raw string pairs against the registry and fill defaults."""
    allowed = command_keys(command)
    values: dict = {}
    for key, text in raw.items():
        if key not in _REGISTRY:
            raise ConfigError(f"unknown config key {key!r}")
        if key not in allowed:
            raise ConfigError(f"key {key!r} does not apply to the {command!r} command")
        parser = _REGISTRY[key][0]
        try:
            values[key] = parser(text)
        except ConfigError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from exc
    for key in allowed:
        if key not in values:
            default = _REGISTRY[key][1]
            values[key] = default() if callable(default) else default
    return ExperimentConfig(command=command, values=values)
