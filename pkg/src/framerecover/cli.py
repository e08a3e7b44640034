"""``frame-recover`` command-line front end.

Every subcommand accepts ``--config FILE`` (JSON with ``schema_version``)
and individual flags; flags override the file, which overrides defaults.
Exit codes: 0 success, 1 computational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (MRI_METHODS, PhaseGrid, make_instance, mri_reconstruct, parse_method,
                          radial_mask, rel_err, run_phase_transition, shepp_logan)
from .frames import DenseFrame, WaveletSpec, identity_frame, random_tight_frame, sidwt_frame
from .io import (Manifest, read_array_csv, read_json, write_array_csv, write_csv, write_json,
                 write_pgm)
from .linalg import ConvergenceError, derive_seed, gaussian
from .solvers import RassoConfig, SolverConfig, SolverError, lambda_max, pfista, solve_rasso
from .theory import BudgetExceeded, check_lemma1, drip_delta, droc_theta, eval_conditions

log = logging.getLogger("framerecover")

SCHEMA_VERSION = 1
DEFAULT_SEED = 42


class UsageError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _strs(text):
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    if str(text).lower() in ("1", "true", "yes", "on"):
        return True
    if str(text).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _gamma(text):
    return "auto" if str(text) == "auto" else float(text)


# name -> (parser, default, help)
_COMMON = {
    "seed": (int, DEFAULT_SEED, "master seed"),
}
SCHEMAS = {
    "solve": {
        "instance": (str, "generated", "generated | identity | files"),
        "n": (int, 64, "signal length"),
        "d": (int, 64, "frame size"),
        "m": (int, 48, "measurements"),
        "ell": (int, 58, "cosparsity"),
        "method": (str, "l1l2:1", "l1 | lp:<p> | l1l2:<alpha>"),
        "solver": (str, "pfista", "pfista | rasso"),
        "lam": (float, None, "absolute regularization weight"),
        "lam_rel": (float, 1e-5, "weight relative to ||D^T A^T b||_inf when lam is unset"),
        "gamma": (_gamma, "auto", "step size or 'auto'"),
        "max_iter": (int, 1000, "iteration cap"),
        "tol": (float, 1e-6, "relative-change tolerance"),
        "continuation": (int, 10, "lambda continuation stages"),
        "rho": (float, 1.0, "coupling weight for the relaxed solver"),
        "noise": (float, 0.0, "noise standard deviation"),
        "A_file": (str, None, "sensing matrix CSV (instance=files)"),
        "b_file": (str, None, "measurement CSV (instance=files)"),
        "D_file": (str, None, "frame matrix CSV (instance=files)"),
        "x0_file": (str, None, "optional ground truth CSV (instance=files)"),
    },
    "phase": {
        "n": (int, 64, "signal length"),
        "varsigma": (float, 1.0, "frame redundancy d/n"),
        "step": (float, 0.1, "grid step for both ratios"),
        "varrhos": (_floats, None, "explicit undersampling ratios"),
        "rhos": (_floats, None, "explicit cosparsity ratios"),
        "trials": (int, 20, "trials per cell"),
        "eps": (float, 1e-2, "success threshold on relative error"),
        "lam_rel": (float, 1e-5, "relative regularization weight"),
        "continuation": (int, 10, "lambda continuation stages"),
        "max_iter": (int, 1000, "iteration cap"),
        "tol": (float, 1e-6, "relative-change tolerance"),
        "methods": (_strs, ["l1", "lp:0.5", "l1l2:1"], "comma-separated methods"),
        "full_scale": (_bool, False, "n=100, 100 trials, step 0.05"),
    },
    "mri": {
        "N": (int, 64, "image side (power of two)"),
        "lines": (int, 24, "radial lines"),
        "methods": (_strs, list(MRI_METHODS), "comma-separated methods"),
        "lam": (float, 1e-3, "regularization weight"),
        "levels": (int, 4, "wavelet levels"),
        "max_iter": (int, 300, "iteration cap (all methods)"),
        "tol": (float, 0.0, "relative-change tolerance; 0 runs to the cap"),
        "noise_sigma": (float, 0.0, "complex noise level"),
    },
    "certify": {
        "instance": (str, "gaussian", "gaussian | orthonormal | files"),
        "n": (int, 6, "signal length"),
        "d": (int, 8, "frame size"),
        "m": (int, 6, "measurements"),
        "A_file": (str, None, "sensing matrix CSV"),
        "D_file": (str, None, "frame matrix CSV"),
        "identity_frame": (_bool, False, "use D = I"),
        "s": (int, 2, "sparsity order"),
        "t": (float, 2.0, "condition parameter t (2 or >= 3)"),
        "alpha": (float, 1.0, "alpha in (0, 1]"),
        "mode": (str, "exhaustive", "exhaustive | sampled"),
        "draws": (int, 100000, "sampled-mode draws"),
        "lemma1": (_bool, False, "also report the ordering properties"),
        "conditions": (_bool, True, "evaluate the recovery condition"),
    },
    "gen": {
        "kind": (str, "signal", "frame | signal | matrix | mask | phantom"),
        "n": (int, 64, "signal length"),
        "d": (int, 64, "frame size"),
        "m": (int, 48, "matrix rows"),
        "ell": (int, 58, "cosparsity"),
        "N": (int, 256, "grid side for mask/phantom"),
        "lines": (int, 76, "radial lines"),
    },
}
for _schema in SCHEMAS.values():
    _schema.update(_COMMON)


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    schema = SCHEMAS[command]
    cfg = {k: v[1] for k, v in schema.items()}
    if getattr(args, "config", None):
        try:
            data = read_json(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        version = data.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise UsageError(f"config schema_version must be {SCHEMA_VERSION}, got {version!r}")
        unknown = sorted(set(data) - set(schema))
        if unknown:
            raise UsageError(f"unknown config keys for '{command}': {', '.join(unknown)}")
        for k, v in data.items():
            cfg[k] = _parse(schema, k, v)
    for k in schema:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = _parse(schema, k, v)
    _validate(command, cfg)
    return cfg


def _parse(schema, key, value):
    if value is None:
        return None
    try:
        return schema[key][0](value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {value!r} ({exc})") from exc


def _require(cond, msg):
    if not cond:
        raise UsageError(msg)


def _validate(command, c):
    # size checks only where the sizes are actually used
    generated = ((command == "solve" and c["instance"] == "generated")
                 or (command == "gen" and c["kind"] in ("frame", "signal", "matrix"))
                 or (command == "certify" and c["instance"] != "files"))
    if generated:
        _require(c["n"] >= 1 and c["d"] >= c["n"], "need d >= n >= 1")
        _require(c["m"] >= 1, "need m >= 1")
    if (command == "solve" and c["instance"] == "generated") or \
            (command == "gen" and c["kind"] == "signal"):
        _require(0 <= c["ell"] < c["n"], "need 0 <= ell < n")
    if command == "solve" and c["instance"] == "identity":
        _require(c["n"] >= 1, "need n >= 1")
    if command == "solve":
        _require(c["instance"] in ("generated", "identity", "files"), "unknown instance source")
        _require(c["solver"] in ("pfista", "rasso"), "solver must be pfista or rasso")
        try:
            parse_method(c["method"])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if c["solver"] == "rasso":
            _require(c["method"].startswith("l1l2"), "the relaxed solver supports l1l2 only")
        _require(c["lam"] is None or c["lam"] > 0, "lam must be positive")
        _require(c["lam_rel"] > 0, "lam_rel must be positive")
        _require(c["max_iter"] >= 1 and c["tol"] >= 0, "bad iteration settings")
        _require(c["rho"] > 0 and c["noise"] >= 0, "rho must be positive, noise nonnegative")
        if c["instance"] == "files":
            _require(c["A_file"] and c["b_file"] and c["D_file"],
                     "instance=files needs A_file, b_file and D_file")
    if command == "phase":
        _require(c["n"] >= 2 and c["trials"] >= 1, "need n >= 2 and trials >= 1")
        _require(0 < c["step"] <= 1, "step must lie in (0, 1]")
        _require(c["varsigma"] >= 1, "varsigma must be >= 1")
        for key in ("varrhos", "rhos"):
            if c[key] is not None:
                _require(all(0 < v <= 1 for v in c[key]), f"{key} must lie in (0, 1]")
        for meth in c["methods"]:
            try:
                parse_method(meth)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
    if command == "mri":
        _require(c["N"] >= 16 and c["N"] & (c["N"] - 1) == 0, "N must be a power of two >= 16")
        _require(1 <= c["lines"] <= 4 * c["N"], "lines out of range")
        _require(c["N"] >= 2 ** c["levels"], "too many wavelet levels for N")
        for meth in c["methods"]:
            if meth != "zero_fill":
                try:
                    parse_method(meth)
                except ValueError as exc:
                    raise UsageError(str(exc)) from exc
    if command == "certify":
        _require(c["instance"] in ("gaussian", "orthonormal", "files"), "unknown instance source")
        _require(c["mode"] in ("exhaustive", "sampled"), "mode must be exhaustive or sampled")
        _require(c["s"] >= 1 and 0 < c["alpha"] <= 1, "need s >= 1 and alpha in (0, 1]")
        _require(c["t"] == 2 or c["t"] >= 3, "t must be 2 or >= 3")
        if c["instance"] == "orthonormal":
            _require(c["m"] >= c["n"], "orthonormal columns need m >= n")
        if c["instance"] == "files":
            _require(c["A_file"] and (c["D_file"] or c["identity_frame"]),
                     "instance=files needs A_file and D_file (or identity_frame)")
    if command == "gen":
        _require(c["kind"] in ("frame", "signal", "matrix", "mask", "phantom"), "unknown kind")
        if c["kind"] in ("mask", "phantom"):
            _require(c["N"] >= 1 and c["N"] & (c["N"] - 1) == 0, "N must be a power of two")
            _require(1 <= c["lines"] <= 4 * c["N"], "lines out of range")


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        out = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _bundle(man: Manifest, command: str, cfg: dict, metrics: dict, timing: dict) -> Path:
    data = {"schema_version": SCHEMA_VERSION, "command": command, "version": version_string(),
            "config": cfg, "metrics": metrics, "timing": timing, "files": man.entries()}
    return write_json(man.path("bundle.json"), data)


# -- commands ------------------------------------------------------------------

def cmd_solve(cfg: dict, out: Path) -> int:
    man = Manifest(out)
    seed = cfg["seed"]
    x0 = None
    if cfg["instance"] == "generated":
        inst = make_instance(cfg["n"], cfg["d"], cfg["m"], cfg["ell"], seed)
        A, frame, x0, b = inst.A, inst.frame, inst.x0, inst.b
    elif cfg["instance"] == "identity":
        n = cfg["n"]
        A, frame = np.eye(n), identity_frame(n)
        x0 = np.zeros(n)
        x0[0] = 1.0
        b = A @ x0
    else:
        try:
            A = np.atleast_2d(read_array_csv(cfg["A_file"]))
            b = np.atleast_1d(read_array_csv(cfg["b_file"]))
            frame = DenseFrame(np.atleast_2d(read_array_csv(cfg["D_file"])))
            if cfg["x0_file"]:
                x0 = np.atleast_1d(read_array_csv(cfg["x0_file"]))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load instance: {exc}") from exc
        if A.shape[0] != b.size or A.shape[1] != frame.n:
            raise UsageError(f"shape mismatch: A {A.shape}, b {b.shape}, D {frame.matrix.shape}")
    if cfg["noise"] > 0:
        b = b + cfg["noise"] * gaussian(b.size, derive_seed(seed, 99))
    lam = cfg["lam"] if cfg["lam"] is not None else cfg["lam_rel"] * lambda_max(A, b, frame)
    if cfg["solver"] == "pfista":
        scfg = SolverConfig(gamma=cfg["gamma"], max_iter=cfg["max_iter"], tol=cfg["tol"],
                            continuation=cfg["continuation"])
        rep = pfista(A, b, frame, parse_method(cfg["method"], lam), scfg)
    else:
        alpha = parse_method(cfg["method"]).alpha
        rcfg = RassoConfig(max_iter=cfg["max_iter"], tol=cfg["tol"], rho=cfg["rho"])
        rep = solve_rasso(A, b, frame, alpha, lam, rcfg)
    summary = rep.summary()
    wall = summary.pop("wall_time_s")
    metrics = dict(summary, lam=lam)
    if x0 is not None:
        metrics["rel_err"] = rel_err(rep.x, x0)
    man.add(write_array_csv(man.path("x.csv"), rep.x))
    man.add(write_json(man.path("report.json"),
                       {"config": cfg, "metrics": metrics,
                        "objective_trace": rep.objective_trace,
                        "rel_change_trace": rep.rel_change_trace}))
    _bundle(man, "solve", cfg, metrics, {"wall_time_s": wall})
    print(f"solve: iterations={rep.iterations} converged={rep.converged}"
          + (f" rel_err={metrics['rel_err']:.3e}" if "rel_err" in metrics else ""))
    return 0


def _grid_from(cfg) -> PhaseGrid:
    kw = dict(eps=cfg["eps"], lam_rel=cfg["lam_rel"], continuation=cfg["continuation"],
              max_iter=cfg["max_iter"], tol=cfg["tol"])
    if cfg["full_scale"]:
        grid = PhaseGrid.full_scale(**kw)
    else:
        k = int(round(1.0 / cfg["step"]))
        steps = tuple(float(v) for v in np.round(np.arange(1, k + 1) * cfg["step"], 10))
        grid = PhaseGrid(n=cfg["n"], varsigma=cfg["varsigma"], varrhos=steps, rhos=steps,
                         trials=cfg["trials"], **kw)
    if cfg["varrhos"] is not None:
        grid.varrhos = tuple(cfg["varrhos"])
    if cfg["rhos"] is not None:
        grid.rhos = tuple(cfg["rhos"])
    return grid


def cmd_phase(cfg: dict, out: Path) -> int:
    man = Manifest(out)
    grid = _grid_from(cfg)
    res = run_phase_transition(grid, cfg["methods"], cfg["seed"])
    man.add(write_csv(man.path("phase.csv"),
                      ["rho", "varrho", "method", "success_rate", "mean_time_s"],
                      [r[:5] for r in res.rows]))
    man.add(write_csv(man.path("timing.csv"), ["rho", "varrho", "method", "mean_time_s"],
                      [(r[0], r[1], r[2], r[4]) for r in res.rows]))
    for meth in res.methods:
        label = parse_method(meth).label
        table = res.table(meth)
        man.add(write_csv(man.path(f"success_{label}.csv"),
                          ["rho"] + [f"{v:g}" for v in grid.varrhos],
                          [[rho] + list(row) for rho, row in zip(grid.rhos, table)]))
    failures = sum(r[5] for r in res.rows)
    metrics = {"total_success": {m: res.total_success(m) for m in res.methods},
               "cells": len(grid.rhos) * len(grid.varrhos), "failed_solves": failures,
               "grid": {"n": grid.n, "varsigma": grid.varsigma, "trials": grid.trials,
                        "varrhos": list(grid.varrhos), "rhos": list(grid.rhos),
                        "eps": grid.eps, "lam_rel": grid.lam_rel,
                        "continuation": grid.continuation},
               "l1_baseline": "unconstrained l1 analysis solved by pfista"}
    if failures:
        log.warning("%d solves failed and were counted as unsuccessful", failures)
    _bundle(man, "phase", cfg, metrics,
            {"mean_time_s": {m: float(np.mean([r[4] for r in res.rows if r[2] == m]))
                             for m in res.methods}})
    print("phase: " + ", ".join(f"{m}={res.total_success(m):.2f}" for m in res.methods))
    return 0


def cmd_mri(cfg: dict, out: Path) -> int:
    man = Manifest(out)
    N = cfg["N"]
    img = shepp_logan(N)
    mask = radial_mask(N, cfg["lines"])
    frame = sidwt_frame(WaveletSpec("db4", cfg["levels"], 2), (N, N))
    scfg = SolverConfig(max_iter=cfg["max_iter"], tol=cfg["tol"], track_objective=False)
    man.add(man.path("phantom.pgm"))
    write_pgm(man.path("phantom.pgm"), img, 0.0, 1.0)
    man.add(man.path("mask.pgm"))
    write_pgm(man.path("mask.pgm"), mask.centered().astype(float), 0.0, 1.0)
    metrics, timing = {}, {}
    for meth in cfg["methods"]:
        r = mri_reconstruct(img, mask, frame, meth, scfg, lam=cfg["lam"],
                            noise_sigma=cfg["noise_sigma"], seed=cfg["seed"])
        name = meth.replace(":", "_")
        rs = write_pgm(man.add(man.path(f"recon_{name}.pgm")), r.recon, 0.0, 1.0)
        ds = write_pgm(man.add(man.path(f"diff_{name}.pgm")), np.abs(r.diff))
        metrics[name] = {"re": r.re, "iterations": r.iterations, "lam": r.lam,
                         "recon_scale": rs, "diff_scale": ds}
        timing[name] = r.wall_time
    man.add(write_json(man.path("metrics.json"),
                       {"sampling_rate": mask.sampling_rate, "lines": mask.lines, "N": N,
                        "methods": {k: dict(v, wall_time_s=timing[k]) for k, v in metrics.items()}}))
    _bundle(man, "mri", cfg, dict(metrics, sampling_rate=mask.sampling_rate),
            {"wall_time_s": timing})
    print("mri: " + ", ".join(f"{k} RE={v['re']:.4f}" for k, v in metrics.items()))
    return 0


def _certify_instance(cfg):
    seed = cfg["seed"]
    if cfg["instance"] == "files":
        try:
            A = np.atleast_2d(read_array_csv(cfg["A_file"]))
            D = (np.eye(A.shape[1]) if cfg["identity_frame"]
                 else np.atleast_2d(read_array_csv(cfg["D_file"])))
            frame = DenseFrame(D)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load instance: {exc}") from exc
        return A, frame
    n, d, m = cfg["n"], cfg["d"], cfg["m"]
    frame = identity_frame(n) if cfg["identity_frame"] else random_tight_frame(n, d, derive_seed(seed, 0))
    G = gaussian((m, n), derive_seed(seed, 1))
    if cfg["instance"] == "orthonormal":
        Q, _ = np.linalg.qr(G)
        A = Q
    else:
        A = G / np.sqrt(m)
    return A, frame


def cmd_certify(cfg: dict, out: Path) -> int:
    man = Manifest(out)
    A, frame = _certify_instance(cfg)
    D = frame.matrix
    s, t, mode = cfg["s"], cfg["t"], cfg["mode"]
    report = {"instance": {"m": A.shape[0], "n": D.shape[0], "d": D.shape[1]}, "mode": mode}
    try:
        report["rip"] = drip_delta(A, D, s, mode, cfg["draws"], cfg["seed"]).to_dict()
        if 2 * s <= D.shape[1]:
            report["roc"] = droc_theta(A, D, s, s, mode, cfg["draws"], cfg["seed"]).to_dict()
        if cfg["lemma1"]:
            lem = check_lemma1(A, D, orders=tuple(range(1, s + 1)), mode=mode)
            report["lemma1"] = {k: lem[k] for k in ("i", "ii", "iii", "iv")}
        if cfg["conditions"] and s >= 2:
            try:
                report["conditions"] = eval_conditions(A, D, s, t, cfg["alpha"], mode,
                                                       cfg["draws"], cfg["seed"]).to_dict()
            except ValueError as exc:
                if isinstance(exc, BudgetExceeded):
                    raise
                report["conditions"] = {"status": "rejected", "reason": str(exc)}
    except BudgetExceeded as exc:
        raise UsageError(f"{exc}. Rerun with --mode sampled or smaller orders.") from exc
    man.add(write_json(man.path("certify.json"), report))
    _bundle(man, "certify", cfg, report, {})
    line = f"certify: delta_{s}={report['rip']['delta']:.6g}"
    if "roc" in report:
        line += f" theta_{s},{s}={report['roc']['theta']:.6g}"
    print(line)
    return 0


def cmd_gen(cfg: dict, out: Path) -> int:
    man = Manifest(out)
    seed, kind = cfg["seed"], cfg["kind"]
    if kind == "frame":
        man.add(write_array_csv(man.path("D.csv"),
                                random_tight_frame(cfg["n"], cfg["d"], derive_seed(seed, 0)).matrix))
    elif kind == "matrix":
        man.add(write_array_csv(man.path("A.csv"), gaussian((cfg["m"], cfg["n"]), seed)))
    elif kind == "signal":
        inst = make_instance(cfg["n"], cfg["d"], cfg["m"], cfg["ell"], seed)
        man.add(write_array_csv(man.path("D.csv"), inst.frame.matrix))
        man.add(write_array_csv(man.path("A.csv"), inst.A))
        man.add(write_array_csv(man.path("x0.csv"), inst.x0))
        man.add(write_array_csv(man.path("b.csv"), inst.b))
        man.add(write_csv(man.path("cosupport.csv"), ["index"], [[int(i)] for i in inst.cosupport]))
    elif kind == "mask":
        mask = radial_mask(cfg["N"], cfg["lines"])
        write_pgm(man.add(man.path("mask.pgm")), mask.centered().astype(float), 0.0, 1.0)
        print(f"gen: sampling_rate={mask.sampling_rate:.6f}")
    else:
        write_pgm(man.add(man.path("phantom.pgm")), shepp_logan(cfg["N"]), 0.0, 1.0)
    _bundle(man, "gen", cfg, {}, {})
    return 0


COMMANDS = {"solve": cmd_solve, "phase": cmd_phase, "mri": cmd_mri,
            "certify": cmd_certify, "gen": cmd_gen}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frame-recover",
                                description="Sparse recovery over tight frames.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=f"{name} subcommand")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--config", help="JSON config file")
        for key, (_, default, help_) in schema.items():
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                            help=f"{help_} (default: {default})")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args.command, args)
        return COMMANDS[args.command](cfg, Path(args.out))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"frame-recover: error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ConvergenceError, np.linalg.LinAlgError, FloatingPointError,
            ValueError) as exc:
        print(f"frame-recover: computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
