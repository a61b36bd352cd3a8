"""``ssimopt`` command line.

Every command reads a clean image (a P5 PGM path or ``corpus:<name>``),
synthesizes the degraded observation where the task calls for one, solves
with the chosen method and writes to the output directory:

    <command>_<method>.pgm        reconstruction
    <command>_<method>_map.pgm    per-block SSIM map, [-1, 1] mapped to [0, 255]
    <command>_<method>_trace.csv  solver trace (when the solver keeps one)
    results.jsonl                 one appended record per run

``sweep`` writes ``sweep_<task>.csv`` instead. Settings resolve as
flag > environment (``SSIMOPT_OUTPUT_DIR``) > ``--config`` file > default.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import apps, corpus
from .core import BlockScheme, mssim, psnr, read_pgm, ssim_map, write_pgm
from .core.pgm import PGMError, atomic_write_bytes
from .prox import tv_seminorm
from .report import SolverError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4

COMMANDS = ("approx", "denoise", "zoom", "deblur", "tikhonov", "sweep", "metrics")
TASK_OF = {"approx": "sparse_approx", "denoise": "denoise", "zoom": "zoom", "deblur": "deblur",
           "tikhonov": "tikhonov"}

# name -> (type, default); every option is also a config-file key
OPTIONS = {
    "input": (str, None),
    "reference": (str, None),
    "output_dir": (str, "ssimopt-out"),
    "lambda": (float, None),
    "target_l0": (int, None),
    "target_tv": (float, None),
    "sigma": (float, None),
    "factor": (int, None),
    "block_size": (int, 8),
    "rho": (float, None),
    "mu": (float, None),
    "eps": (float, None),
    "seed": (int, 0),
    "method": (str, "ssim"),
    "max_iters": (int, 500),
    "task": (str, "approx"),
    "targets": (str, None),
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="ssimopt", description="SSIM-based image reconstruction experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="text file of key=value lines")
    for name, (typ, _) in OPTIONS.items():
        flag = "--" + name.replace("_", "-")
        # defaults stay None so that unset flags can fall through to the config
        p.add_argument(flag, dest=name, type=typ, default=None)
    return p


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        typ = OPTIONS[key][0]
        try:
            out[key] = typ(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{n}: bad value for {key}: {value!r}") from exc
    return out


def resolve(args, environ=None):
    """Merge flags, environment, config file and defaults into one dict."""
    environ = os.environ if environ is None else environ
    cfg = read_config(args.config) if args.config else {}
    out = {"command": args.command}
    for name, (_, default) in OPTIONS.items():
        value = getattr(args, name)
        if value is None and name == "output_dir":
            value = environ.get("SSIMOPT_OUTPUT_DIR")
        if value is None:
            value = cfg.get(name, default)
        out[name] = value
    if out["method"] not in apps.METHODS:
        raise ConfigError(f"--method must be one of {apps.METHODS}")
    if out["input"] is None:
        raise ConfigError("--input is required")
    if out["command"] == "metrics" and out["reference"] is None:
        raise ConfigError("metrics needs --reference")
    if out["command"] == "sweep" and not out["targets"]:
        raise ConfigError("sweep needs --targets (comma separated)")
    return out


def load_image(source):
    if source.startswith("corpus:"):
        try:
            return corpus.load(source.split(":", 1)[1])
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        return read_pgm(source)
    except (OSError, PGMError) as exc:
        raise OSError(f"cannot read image {source}: {exc}") from exc


def experiment_spec(cfg, task):
    target = None
    if cfg["target_l0"] is not None:
        target = apps.RegMatchTarget.l0(cfg["target_l0"])
    elif cfg["target_tv"] is not None:
        target = apps.RegMatchTarget.tv(cfg["target_tv"])
    factor = cfg["factor"] if cfg["factor"] is not None else (4 if task == "zoom" else None)
    sigma = cfg["sigma"] if cfg["sigma"] is not None else (5.0 if task == "deblur" else None)
    try:
        return apps.ExperimentSpec(task, cfg["method"], lam=cfg["lambda"], target=target,
                                   scheme=BlockScheme.square(cfg["block_size"]), sigma=sigma,
                                   factor=factor, seed=cfg["seed"], rho=cfg["rho"],
                                   mu=cfg["mu"], max_iter=cfg["max_iters"],
                                   eps=cfg["eps"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _plain(v):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def append_record(out_dir, record):
    """Append one JSON line to ``results.jsonl`` (rewritten atomically)."""
    path = os.path.join(out_dir, "results.jsonl")
    old = b""
    if os.path.exists(path):
        with open(path, "rb") as fh:
            old = fh.read()
    line = json.dumps(_plain(record), sort_keys=True, default=_json_default,
                      allow_nan=False) + "\n"
    atomic_write_bytes(path, old + line.encode())


def _params(cfg):
    return {k: v for k, v in cfg.items() if k not in ("command", "output_dir") and v is not None}


def run_metrics(cfg, out_dir):
    X = load_image(cfg["input"])
    R = load_image(cfg["reference"])
    if X.shape != R.shape:
        raise ConfigError(f"shape mismatch {X.shape} vs {R.shape}")
    scheme = BlockScheme.square(cfg["block_size"])
    m = ssim_map(X, R, scheme)
    write_pgm(os.path.join(out_dir, "metrics_map.pgm"), (m + 1.0) / 2.0)
    record = {"command": "metrics", "params": _params(cfg), "mssim": mssim(X, R, scheme),
              "psnr": psnr(X, R), "tv": tv_seminorm(X)}
    append_record(out_dir, record)
    return record


def run_sweep(cfg, out_dir):
    X = load_image(cfg["input"])
    task = TASK_OF.get(cfg["task"], cfg["task"])
    if task not in ("sparse_approx", "denoise", "zoom", "deblur"):
        raise ConfigError(f"cannot sweep task {cfg['task']!r}")
    try:
        conv = int if task == "sparse_approx" else float
        targets = [conv(t) for t in cfg["targets"].split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --targets: {exc}") from exc
    base = experiment_spec(dict(cfg, target_l0=None, target_tv=None), task)
    rows = apps.sweep(task, targets, X, spec=base)
    name = f"sweep_{cfg['task']}.csv"
    atomic_write_bytes(os.path.join(out_dir, name), apps.sweep_csv(rows).encode())
    record = {"command": "sweep", "params": _params(cfg), "rows": rows}
    append_record(out_dir, record)
    return record


def run_task(cfg, out_dir):
    X = load_image(cfg["input"])
    task = TASK_OF[cfg["command"]]
    spec = experiment_spec(cfg, task)
    rep = apps.run_task(X, spec)
    stem = os.path.join(out_dir, f"{cfg['command']}_{cfg['method']}")
    recon = np.asarray(rep.x, dtype=np.float64)
    write_pgm(stem + ".pgm", recon)
    ref = X[:recon.shape[0], :recon.shape[1]]
    write_pgm(stem + "_map.pgm", (ssim_map(recon, ref, spec.scheme) + 1.0) / 2.0)
    if rep.trace:
        rep.write_trace(stem + "_trace.csv")
    lam = rep.info.get("lam")
    record = {
        "command": cfg["command"], "params": _params(cfg), "mssim": rep.mssim, "tv": rep.tv,
        "l0": None if rep.l0 is None else float(np.mean(rep.l0)),
        "lambda": None if lam is None else (float(lam) if np.ndim(lam) == 0 else "per-block"),
        "iterations": rep.iterations, "converged": bool(rep.converged), "status": rep.status,
        "runtime": rep.runtime,
    }
    append_record(out_dir, record)
    return record


def run(cfg):
    out_dir = cfg["output_dir"]
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    if cfg["command"] == "metrics":
        return run_metrics(cfg, out_dir)
    if cfg["command"] == "sweep":
        return run_sweep(cfg, out_dir)
    return run_task(cfg, out_dir)


def main(argv=None, environ=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args, environ)
        record = run(cfg)
    except (SolverError, RuntimeError) as exc:
        print(f"ssimopt: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"ssimopt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # ConfigError, plus parameter checks raised by the library
        print(f"ssimopt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = {k: record[k] for k in ("mssim", "tv", "psnr") if record.get(k) is not None}
    print(json.dumps(_plain({"command": record["command"], **summary}), default=_json_default))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
