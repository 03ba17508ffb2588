"""Command-line client for the service endpoints.

Each subcommand resolves a flat key-value config (file plus --key=value
overrides), posts it to the corresponding service endpoint, and writes the
returned artifacts. By default the service runs in-process; --server URL
targets a remote instance instead. Existing output files are never
overwritten unless --overwrite is passed.
"""

from __future__ import annotations

import json
import os
import sys

import numpy as np

from .config import (
    SEED_ENV_VAR,
    ConfigError,
    ExperimentConfig,
    command_keys,
    parse_config_file,
    resolve,
)

COMMANDS = ("schedule", "solve", "train", "verify", "trace")

USAGE = f"""usage: istaprune <command> [--config FILE] [--key=value ...] [options]

commands:
  schedule   emit a threshold/lr/penalty schedule as CSV
  solve      run the l1 least-squares solver on a problem
  train      run the pruning trainer, writing metrics and weights
  verify     check the trainer against the proximal reference, exit 1 on mismatch
  trace      penalty-shape or early-pruning JSON reports
  serve      host the service over HTTP (--host, --port)

options:
  --config FILE    flat key=value config file (dotted keys, '#' comments)
  --key=value      override any config key, e.g. --scheduler.kind=slats
  --output PATH    write the main artifact here (default: stdout)
  --weights PATH   train only: also write the final weight vector here
  --overwrite      allow replacing existing output files
  --server URL     use a remote service instead of the in-process one
  --help           with a command: list that command's config keys

the default seed comes from ${SEED_ENV_VAR} when set.
"""


class _UsageError(Exception):
    pass


def _parse_args(argv: list) -> tuple:
    raw: dict = {}
    opts = {"config": None, "output": None, "weights": None, "overwrite": False, "server": None}
    want_help = False
    i = 0
    while i < len(argv):
        token = argv[i]
        if not token.startswith("--"):
            raise _UsageError(f"unexpected argument {token!r}")
        body = token[2:]
        if body == "help":
            want_help = True
            i += 1
            continue
        if body == "overwrite":
            opts["overwrite"] = True
            i += 1
            continue
        if "=" in body:
            key, value = body.split("=", 1)
        else:
            if i + 1 >= len(argv):
                raise _UsageError(f"option {token} needs a value")
            key, value = body, argv[i + 1]
            i += 1
        if key in ("config", "output", "weights", "server"):
            opts[key] = value
        else:
            if key in raw:
                raise _UsageError(f"duplicate option --{key}")
            raw[key] = value
        i += 1
    return raw, opts, want_help


def _load_table(path: str) -> np.ndarray:
    try:
        table = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path} is not a numeric CSV: {exc}") from exc
    if table.shape[1] < 2:
        raise ConfigError(f"{path} needs at least two columns (features, target)")
    return table


def _dataset_payload(v: dict) -> dict:
    if v["data.file"]:
        table = _load_table(v["data.file"])
        return {
            "inputs": [[float(x) for x in row] for row in table[:, :-1]],
            "targets": [float(y) for y in table[:, -1]],
        }
    return {
        "synthetic": {
            "n_samples": v["data.n_samples"],
            "n_features": v["data.n_features"],
            "k_nonzero": v["data.k_nonzero"],
            "noise_std": v["data.noise_std"],
            "seed": v["data.seed"],
        }
    }


def _scheduler_payload(v: dict) -> dict:
    return {
        "kind": v["scheduler.kind"],
        "final_threshold": v["scheduler.final_threshold"],
        "d0": v["scheduler.d0"],
        "mu": v["scheduler.mu"],
        "beta": v["scheduler.beta"],
        "s_init": v["scheduler.s_init"],
        "str_decay": v["scheduler.str_decay"],
        "include_warmup": v["scheduler.include_warmup"],
    }


def _lr_payload(v: dict) -> dict:
    return {
        "kind": v["lr.kind"],
        "eta_max": v["lr.eta_max"],
        "epochs": v["lr.epochs"],
        "batches": v["lr.batches"],
        "kappa": v["lr.kappa"],
        "warmup_epochs": v["lr.warmup_epochs"],
    }


def _train_payload(cfg: ExperimentConfig) -> dict:
    v = cfg.values
    return {
        "scheduler": _scheduler_payload(v),
        "lr": _lr_payload(v),
        "trainer": {
            "gradient_mode": v["trainer.gradient_mode"],
            "weight_decay": v["trainer.weight_decay"],
            "momentum": v["trainer.momentum"],
            "record_trace": v["trainer.record_trace"],
        },
        "model": {"kind": v["model.kind"], "hidden": v["model.hidden"]},
        "data": _dataset_payload(v),
        "seed": v["seed"],
        "init_scale": v["init.scale"],
        "config_hash": cfg.hash(),
    }


def _build_payload(cfg: ExperimentConfig) -> dict:
    v = cfg.values
    if cfg.command == "schedule":
        return {
            "scheduler": _scheduler_payload(v),
            "lr": _lr_payload(v),
            "config_hash": cfg.hash(),
        }
    if cfg.command == "solve":
        payload = {
            "mu": v["solve.mu"],
            "step_size": v["solve.step_size"],
            "max_iters": v["solve.max_iters"] or None,
            "kkt_tol": v["solve.kkt_tol"],
            "fista": v["solve.fista"],
            "continuation": list(v["solve.continuation"]) or None,
            "config_hash": cfg.hash(),
        }
        if v["problem.file"]:
            table = _load_table(v["problem.file"])
            payload["matrix"] = [[float(x) for x in row] for row in table[:, :-1]]
            payload["rhs"] = [float(y) for y in table[:, -1]]
        else:
            payload["synthetic"] = {
                "n_samples": v["problem.n_samples"],
                "n_features": v["problem.n_features"],
                "k_nonzero": v["problem.k_nonzero"],
                "noise_std": v["problem.noise_std"],
                "seed": v["problem.seed"],
            }
        return payload
    if cfg.command == "train":
        return _train_payload(cfg)
    if cfg.command == "verify":
        payload = _train_payload(cfg)
        payload["tolerance"] = v["verify.tolerance"]
        return payload
    if cfg.command == "trace":
        return {
            "kind": v["trace.kind"],
            "scheduler": _scheduler_payload(v),
            "lr": _lr_payload(v),
            "betas": list(v["trace.betas"]),
            "level": v["trace.level"],
            "final_threshold": v["scheduler.final_threshold"] or 0.4,
            "seed": v["seed"],
            "config_hash": cfg.hash(),
        }
    raise ConfigError(f"unknown command {cfg.command!r}")


def _make_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server)
    import warnings

    with warnings.catch_warnings():
        # starlette warns about its httpx-backed TestClient on import
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _write_text(path: str | None, text: str, overwrite: bool) -> None:
    if path is None:
        print(text, end="")
        return
    if os.path.exists(path) and not overwrite:
        raise ConfigError(f"{path} exists; pass --overwrite to replace it")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _ordered_json(body: dict, first: tuple = ("config_hash",)) -> str:
    ordered = {key: body[key] for key in first if key in body}
    ordered.update({key: value for key, value in body.items() if key not in ordered})
    return json.dumps(ordered, indent=2) + "\n"


def _fail(message: str) -> None:
    print(json.dumps({"error": message}), file=sys.stderr)


def _key_help(command: str) -> str:
    from .config import _REGISTRY  # registry defaults, for help output only

    lines = [f"config keys for {command!r}:"]
    for key in command_keys(command):
        default = _REGISTRY[key][1]
        default = default() if callable(default) else default
        rendered = "auto" if default is None else default
        lines.append(f"  {key} (default: {rendered})")
    return "\n".join(lines) + "\n"


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help", "help"):
        print(USAGE, end="")
        return 0
    command, rest = argv[0], argv[1:]

    if command == "serve":
        host, port = "127.0.0.1", 8000
        i = 0
        while i < len(rest):
            if rest[i] == "--host" and i + 1 < len(rest):
                host, i = rest[i + 1], i + 2
            elif rest[i].startswith("--host="):
                host, i = rest[i].split("=", 1)[1], i + 1
            elif rest[i] == "--port" and i + 1 < len(rest):
                port, i = int(rest[i + 1]), i + 2
            elif rest[i].startswith("--port="):
                port, i = int(rest[i].split("=", 1)[1]), i + 1
            else:
                _fail(f"unknown serve option {rest[i]!r}")
                return 2
        import uvicorn

        from .service import app

        uvicorn.run(app, host=host, port=port)
        return 0

    if command not in COMMANDS:
        _fail(f"unknown command {command!r}; see istaprune --help")
        return 2

    try:
        raw, opts, want_help = _parse_args(rest)
        if want_help:
            print(_key_help(command), end="")
            return 0
        file_raw = parse_config_file(opts["config"]) if opts["config"] else {}
        file_raw.update(raw)  # flags win over the file
        cfg = resolve(command, file_raw)
        payload = _build_payload(cfg)
    except (_UsageError, ConfigError) as exc:
        _fail(str(exc))
        return 2

    client = _make_client(opts["server"])
    try:
        response = client.post(f"/{command}", json=payload)
    except Exception as exc:  # connection-level failure against a remote server
        _fail(f"request failed: {exc}")
        return 1
    finally:
        client.close()
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        _fail(f"{command} failed: {detail}")
        return 1
    body = response.json()

    try:
        if command == "schedule":
            _write_text(opts["output"], body["csv"], opts["overwrite"])
        elif command == "solve":
            artifact = {k: v for k, v in body.items()}
            _write_text(opts["output"], _ordered_json(artifact), opts["overwrite"])
        elif command == "train":
            _write_text(opts["output"], body["metrics_csv"], opts["overwrite"])
            if opts["weights"]:
                _write_text(opts["weights"], body["weights_text"], opts["overwrite"])
        elif command in ("verify", "trace"):
            _write_text(opts["output"], _ordered_json(body), opts["overwrite"])
    except ConfigError as exc:
        _fail(str(exc))
        return 2

    if command == "verify" and not body["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
