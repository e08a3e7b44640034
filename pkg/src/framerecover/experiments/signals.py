"""Cosparse signal generation and phase-transition sweeps."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..frames import DenseFrame, random_tight_frame
from ..linalg import choose, derive_seed, gaussian
from ..prox import ProxSpec
from ..solvers import SolverConfig, lambda_max, pfista

log = logging.getLogger(__name__)

__all__ = [
    "CosparseInstance",
    "PhaseGrid",
    "PhaseResult",
    "gen_cosparse",
    "gaussian_matrix",
    "make_instance",
    "parse_method",
    "method_label",
    "rel_err",
    "run_phase_transition",
    "DEFAULT_METHODS",
]

DEFAULT_METHODS = ("l1", "lp:0.5", "l1l2:1")


@dataclass
class CosparseInstance:
    x0: np.ndarray
    frame: DenseFrame
    cosupport: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    seed: int = 0

    @property
    def omega(self):
        return self.frame.matrix.T


def gaussian_matrix(m: int, n: int, seed: int) -> np.ndarray:
    if m < 1 or n < 1:
        raise ValueError(f"need m, n >= 1, got {m}x{n}")
    return gaussian((m, n), seed)


def gen_cosparse(frame: DenseFrame, ell: int, seed: int, max_redraws: int = 10) -> CosparseInstance:
    """Signal annihilated by ``ell`` randomly chosen rows of ``Omega = D^T``.

    A Gaussian vector is projected onto the orthogonal complement of the span
    of the chosen rows. Ill-conditioned row subsets are redrawn up to
    ``max_redraws`` times before falling back to a pseudo-inverse.
    """
    n, d = frame.n, frame.d
    if not 0 <= ell < n:
        raise ValueError(f"cosparsity must satisfy 0 <= ell < n, got ell={ell}, n={n}")
    omega = frame.matrix.T
    y = gaussian(n, derive_seed(seed, 1))
    if ell == 0:
        return CosparseInstance(y, frame, np.array([], dtype=int), seed=seed)
    for attempt in range(max_redraws):
        S = choose(d, ell, derive_seed(seed, 2, attempt))
        rows = omega[S]
        gram = rows @ rows.T
        if np.linalg.cond(gram) < 1e12:
            x0 = y - rows.T @ np.linalg.solve(gram, rows @ y)
            break
    else:
        log.warning("cosupport Gram matrix singular after %d draws; using pinv", max_redraws)
        x0 = y - np.linalg.pinv(rows) @ (rows @ y)
    return CosparseInstance(x0, frame, S, seed=seed)


def make_instance(n: int, d: int, m: int, ell: int, seed: int) -> CosparseInstance:
    """Frame, cosparse signal, Gaussian sensing matrix and noiseless data."""
    frame = random_tight_frame(n, d, derive_seed(seed, 0))
    inst = gen_cosparse(frame, ell, derive_seed(seed, 3))
    inst.A = gaussian_matrix(m, n, derive_seed(seed, 4))
    inst.b = inst.A @ inst.x0
    inst.seed = seed
    return inst


def rel_err(x_hat, x0) -> float:
    return float(np.linalg.norm(np.ravel(x_hat) - np.ravel(x0)) / np.linalg.norm(x0))


def parse_method(name: str, lam: float = 1.0) -> ProxSpec:
    """``l1``, ``lp:<p>`` (or ``lp_<p>``), ``l1l2`` / ``l1l2:<alpha>``."""
    key, _, arg = name.replace("_", ":", 1).partition(":")
    if key == "l1":
        return ProxSpec("l1", lam)
    if key == "lp":
        return ProxSpec("lp", lam, p=float(arg or 0.5))
    if key == "l1l2":
        return ProxSpec("l1_minus_alpha_l2", lam, alpha=float(arg or 1.0))
    raise ValueError(f"unknown method {name!r}")


def method_label(name: str) -> str:
    return parse_method(name).label


@dataclass
class PhaseGrid:
    n: int = 64
    varsigma: float = 1.0
    varrhos: tuple = tuple(np.round(np.arange(1, 11) * 0.1, 2))
    rhos: tuple = tuple(np.round(np.arange(1, 11) * 0.1, 2))
    trials: int = 20
    eps: float = 1e-2
    lam_rel: float = 1e-5
    continuation: int = 10
    max_iter: int = 1000
    tol: float = 1e-6

    @classmethod
    def full_scale(cls, **kw) -> "PhaseGrid":
        steps = tuple(np.round(np.arange(1, 21) * 0.05, 2))
        return cls(n=100, varrhos=steps, rhos=steps, trials=100, **kw)

    def cell_dims(self, varrho: float, rho: float) -> tuple:
        """``(m, d, ell)`` with ``m = varrho*n``, ``d = varsigma*n``, ``ell = n - rho*m``."""
        m = max(1, int(round(varrho * self.n)))
        d = int(round(self.varsigma * self.n))
        ell = self.n - max(1, int(round(rho * m)))
        return m, d, max(ell, 0)

    def cells(self):
        k = 0
        for rho in self.rhos:
            for varrho in self.varrhos:
                yield k, float(rho), float(varrho)
                k += 1


@dataclass
class PhaseResult:
    grid: PhaseGrid
    methods: tuple
    seed: int
    # rows: (rho, varrho, method, success_rate, mean_time_s, failures)
    rows: list = field(default_factory=list)

    def table(self, method: str) -> np.ndarray:
        """Success-rate matrix indexed ``[rho_index, varrho_index]``."""
        out = np.zeros((len(self.grid.rhos), len(self.grid.varrhos)))
        ri = {r: i for i, r in enumerate(self.grid.rhos)}
        vi = {v: j for j, v in enumerate(self.grid.varrhos)}
        for rho, varrho, meth, rate, *_ in self.rows:
            if meth == method:
                out[ri[rho], vi[varrho]] = rate
        return out

    def total_success(self, method: str) -> float:
        return float(self.table(method).sum())


def _solver_cfg(grid: PhaseGrid) -> SolverConfig:
    return SolverConfig(max_iter=grid.max_iter, tol=grid.tol,
                        continuation=grid.continuation, track_objective=False)


def _run_trial(args):
    grid, methods, seed, cell, varrho, rho, trial = args
    m, d, ell = grid.cell_dims(varrho, rho)
    inst = make_instance(grid.n, d, m, ell, derive_seed(seed, cell, trial))
    lam = grid.lam_rel * lambda_max(inst.A, inst.b, inst.frame)
    cfg = _solver_cfg(grid)
    out = []
    for meth in methods:
        t0 = time.perf_counter()
        try:
            rep = pfista(inst.A, inst.b, inst.frame, parse_method(meth, lam), cfg)
            ok = rel_err(rep.x, inst.x0) < grid.eps
            failed = False
        except Exception as exc:  # counted as unsuccessful
            log.warning("cell %d trial %d method %s failed: %s", cell, trial, meth, exc)
            ok, failed = False, True
        out.append((cell, trial, meth, bool(ok), time.perf_counter() - t0, failed))
    return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FRAME_RECOVER_THREADS", "1")))
    except ValueError:
        return 1


def run_phase_transition(grid: PhaseGrid, methods=DEFAULT_METHODS, seed: int = 42,
                         workers: int = None) -> PhaseResult:
    """Success rates over the (rho, varrho) grid for each method.

    Every trial draws a fresh frame, signal and sensing matrix from
    ``derive_seed(seed, cell, trial)``; all methods see the same instance.
    """
    methods = tuple(methods)
    jobs = [(grid, methods, seed, cell, varrho, rho, trial)
            for cell, rho, varrho in grid.cells() for trial in range(grid.trials)]
    workers = workers or _workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=8))
    else:
        results = [_run_trial(j) for j in jobs]

    agg = {}
    for trial_rows in results:
        for cell, _trial, meth, ok, dt, failed in trial_rows:
            s = agg.setdefault((cell, meth), [0, 0, 0.0, 0])
            s[0] += ok
            s[1] += 1
            s[2] += dt
            s[3] += failed
    res = PhaseResult(grid, methods, seed)
    for cell, rho, varrho in grid.cells():
        for meth in methods:
            succ, count, tsum, failed = agg[(cell, meth)]
            completed = count - failed
            rate = succ / completed if completed else 0.0
            res.rows.append((rho, varrho, meth, rate, tsum / count, failed))
    return res
