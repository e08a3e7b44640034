"""Analysis-sparsity solvers over tight frames.

``pfista`` minimizes ``lam*R(D^T x) + 0.5*||Ax - b||^2`` for ``R`` one of l1,
l1 - alpha*l2 or lp, using FISTA on the frame coefficients with the
projection onto ``range(D^T)`` folded into a synthesis step::

    x_{k+1} = D prox_{gamma*lam*R}(D^T (y_k - gamma * A^*(A y_k - b)))
    t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
    y_{k+1} = x_{k+1} + (t_k - 1)/t_{k+1} * (x_{k+1} - x_k)

``solve_rasso`` minimizes the relaxed split objective
``lam*(||z||_1 - alpha*||z||_2) + 0.5*||Ax - b||^2 + rho/2*||D^T x - z||^2``
by exact alternating minimization over ``z`` and ``x``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .frames import TightFrame
from .linalg import ConvergenceError, LinearOperator, as_operator, cg_solve, power_iteration_norm
from .prox import ProxSpec, apply_prox, l1_minus_alpha_l2, penalty, prox_l1_minus_alpha_l2

__all__ = [
    "SolverConfig",
    "RassoConfig",
    "SolveReport",
    "SolverError",
    "pfista",
    "solve_rasso",
    "objective",
    "objective_asso",
    "objective_rasso",
    "lambda_max",
    "step_size",
]

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls shared by the solvers.

    ``continuation`` is the number of geometric lambda stages (0 or 1 means
    solve directly at the target lambda). Each stage restarts the momentum and
    is warm-started from the previous one; intermediate stages stop at
    ``stage_tol`` or ``stage_iter`` iterations.
    """

    gamma: Union[float, str] = "auto"
    max_iter: int = 1000
    tol: float = 1e-6
    x0: str = "backprojection"
    continuation: int = 0
    stage_tol: float = 1e-4
    stage_iter: int = 200
    track_objective: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.x0 not in ("backprojection", "zero"):
            raise ValueError("x0 must be 'backprojection' or 'zero'")
        if not (self.gamma == "auto" or (isinstance(self.gamma, (int, float)) and self.gamma > 0)):
            raise ValueError(f"gamma must be 'auto' or a positive number, got {self.gamma!r}")


@dataclass(frozen=True)
class RassoConfig(SolverConfig):
    rho: float = 1.0
    inner_tol: float = 1e-12
    inner_max_iter: int = 500
    # Geometric ramp of rho from rho_start up to rho; None means a single stage.
    rho_start: Optional[float] = None
    rho_stages: int = 1
    # Momentum on z with restart on objective increase. Much faster for large
    # rho but gives up the per-iteration monotonicity of plain alternation.
    accelerate: bool = False

    def __post_init__(self):
        super().__post_init__()
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.rho_start is not None and not 0 < self.rho_start <= self.rho:
            raise ValueError("rho_start must lie in (0, rho]")


@dataclass
class SolveReport:
    x: np.ndarray
    objective_trace: list
    rel_change_trace: list
    iterations: int
    converged: bool
    wall_time: float
    gamma: float = float("nan")
    lam_schedule: list = field(default_factory=list)
    stage_trace: list = field(default_factory=list)
    z: Optional[np.ndarray] = None

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "wall_time_s": self.wall_time,
            "gamma": self.gamma,
            "lam_schedule": list(self.lam_schedule),
            "final_objective": self.objective_trace[-1] if self.objective_trace else None,
            "final_rel_change": self.rel_change_trace[-1] if self.rel_change_trace else None,
        }


# -- objectives --------------------------------------------------------------

def _residual(A: LinearOperator, x, b):
    return A.forward(x) - b


def objective(x, A, b, frame: TightFrame, spec: ProxSpec) -> float:
    A = as_operator(A)
    r = _residual(A, x, b)
    return spec.lam * penalty(spec, frame.analysis(x)) + 0.5 * float(np.vdot(r, r).real)


def objective_asso(x, A, b, frame: TightFrame, lam: float, alpha: float) -> float:
    """``lam*(||D^T x||_1 - alpha*||D^T x||_2) + 0.5*||Ax - b||^2``."""
    A = as_operator(A)
    r = _residual(A, x, b)
    return lam * l1_minus_alpha_l2(frame.analysis(x), alpha) + 0.5 * float(np.vdot(r, r).real)


def objective_rasso(x, z, A, b, frame: TightFrame, lam: float, alpha: float, rho: float) -> float:
    A = as_operator(A)
    r = _residual(A, x, b)
    gap = frame.analysis(x) - z
    return (lam * l1_minus_alpha_l2(z, alpha) + 0.5 * float(np.vdot(r, r).real)
            + 0.5 * rho * float(np.vdot(gap, gap).real))


# -- helpers -----------------------------------------------------------------

def _gradient(A: LinearOperator, y, b):
    g = A.adjoint(A.forward(y) - b)
    return g.real if np.iscomplexobj(g) and not np.iscomplexobj(y) else g


def _backprojection(A: LinearOperator, b):
    g = A.adjoint(b)
    return np.ascontiguousarray(g.real) if np.iscomplexobj(g) else np.asarray(g, dtype=float)


def _rel_change(new, old) -> float:
    num = np.linalg.norm(new - old)
    den = np.linalg.norm(old)
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(num / den)


def lambda_max(A, b, frame: TightFrame) -> float:
    """``||D^T A^* b||_inf``: the l1 weight above which ``x = 0`` is stationary."""
    A = as_operator(A)
    return float(np.max(np.abs(frame.analysis(_backprojection(A, b)))))


def step_size(A, gamma: Union[float, str] = "auto") -> tuple:
    """Resolve the gradient step. Returns ``(gamma, ||A||_2)``.

    ``"auto"`` gives ``0.99 / ||A||^2``; explicit steps above ``1/||A||^2``
    are rejected.
    """
    A = as_operator(A)
    norm = power_iteration_norm(A, tol=1e-10).value
    if norm == 0.0:
        raise ValueError("sensing operator is zero")
    limit = 1.0 / norm ** 2
    if gamma == "auto":
        return 0.99 * limit, norm
    gamma = float(gamma)
    if gamma <= 0:
        raise ValueError(f"step size must be positive, got {gamma}")
    if gamma > limit * (1.0 + 1e-9):
        raise ValueError(f"step size {gamma:.6g} exceeds 1/||A||^2 = {limit:.6g}")
    return gamma, norm


def _lam_schedule(lam: float, lam_top: float, stages: int) -> list:
    if stages <= 1 or lam_top <= lam:
        return [lam]
    return [float(v) for v in np.geomspace(lam_top, lam, stages)]


# -- pFISTA ------------------------------------------------------------------

def _fixed_point_residual(A, b, frame, spec, x, gamma) -> float:
    """Relative move of one momentum-free step from ``x``.

    Small momentum steps alone do not certify a fixed point, so the final
    stage also requires this before declaring convergence.
    """
    v = x - gamma * _gradient(A, x, b)
    return _rel_change(frame.synthesis(apply_prox(spec, frame.analysis(v), scale=gamma)), x)


def pfista(A, b, frame: TightFrame, prox: ProxSpec, cfg: SolverConfig = SolverConfig(),
           x0=None) -> SolveReport:
    """Projected FISTA for the unconstrained analysis model.

    Works for dense matrices and matrix-free operators; complex-valued
    measurements of a real signal are handled by taking the real part of
    ``A^*(Ay - b)``.
    """
    start = time.perf_counter()
    A = as_operator(A)
    b = np.asarray(b)
    gamma, _ = step_size(A, cfg.gamma)

    if x0 is not None:
        x = np.array(x0, dtype=float)
    elif cfg.x0 == "zero":
        x = np.zeros(frame.signal_shape)
    else:
        x = _backprojection(A, b).reshape(frame.signal_shape)

    schedule = _lam_schedule(prox.lam, lambda_max(A, b, frame), cfg.continuation)
    obj_trace, rel_trace, stage_trace = [], [], []
    converged = False
    total = 0
    for stage, lam in enumerate(schedule):
        final = stage == len(schedule) - 1
        spec = prox.with_lam(lam)
        tol = cfg.tol if final else max(cfg.tol, cfg.stage_tol)
        cap = cfg.max_iter if final else min(cfg.max_iter, cfg.stage_iter)
        y = x.copy()
        t = 1.0
        converged = False
        for _ in range(cap):
            v = y - gamma * _gradient(A, y, b)
            coef = apply_prox(spec, frame.analysis(v), scale=gamma)
            x_new = frame.synthesis(coef)
            if not np.all(np.isfinite(x_new)):
                raise SolverError(f"non-finite iterate at iteration {total + 1} "
                                  f"(stage {stage}, lam={lam:.3e}, gamma={gamma:.3e})")
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            rel = _rel_change(x_new, x)
            x, t = x_new, t_new
            total += 1
            rel_trace.append(rel)
            stage_trace.append(stage)
            if cfg.track_objective:
                obj_trace.append(objective(x, A, b, frame, prox))
            if rel < tol and (not final or _fixed_point_residual(A, b, frame, spec, x, gamma) < 10 * tol):
                converged = True
                break
    if not cfg.track_objective:
        obj_trace = [objective(x, A, b, frame, prox)]
    return SolveReport(x=x, objective_trace=obj_trace, rel_change_trace=rel_trace,
                       iterations=total, converged=converged,
                       wall_time=time.perf_counter() - start, gamma=gamma,
                       lam_schedule=schedule, stage_trace=stage_trace)


# -- relaxed split model -----------------------------------------------------

def solve_rasso(A, b, frame: TightFrame, alpha: float, lam: float,
                cfg: RassoConfig = RassoConfig()) -> SolveReport:
    """Alternating minimization of the relaxed l1 - alpha*l2 analysis model.

    z-step: ``z = prox_{(lam/rho)(l1 - alpha*l2)}(D^T x)``.
    x-step: ``(A^*A + rho I) x = A^*b + rho D z`` (uses ``D D^T = I``), solved
    by CG warm-started at the current ``x``.

    Both steps are exact block minimizations, so the objective never
    increases within a fixed ``rho``. With ``rho_start`` set, ``rho`` is
    ramped geometrically over ``rho_stages`` stages, each warm-started from
    the previous one.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    start = time.perf_counter()
    A = as_operator(A)
    b = np.asarray(b)
    Atb = _backprojection(A, b).reshape(frame.signal_shape)
    x = np.zeros(frame.signal_shape) if cfg.x0 == "zero" else Atb.copy()
    z = frame.analysis(x)

    if cfg.rho_start is None or cfg.rho_stages <= 1:
        rhos = [cfg.rho]
    else:
        rhos = [float(r) for r in np.geomspace(cfg.rho_start, cfg.rho, cfg.rho_stages)]

    obj_trace, rel_trace, stage_trace = [], [], []
    converged = False
    total = 0
    for stage, rho in enumerate(rhos):
        final = stage == len(rhos) - 1
        tol = cfg.tol if final else max(cfg.tol, cfg.stage_tol)
        normal = _shifted_normal(A, rho)

        def x_step(zz, warm):
            rhs = Atb + rho * frame.synthesis(zz)
            try:
                xx = cg_solve(normal, rhs.ravel(), tol=cfg.inner_tol,
                              max_iter=cfg.inner_max_iter, x0=warm.ravel())
            except ConvergenceError as exc:
                raise SolverError(f"x-step CG failed at outer iteration {total + 1} "
                                  f"(rho={rho:.3e}): {exc}") from exc
            return xx.reshape(frame.signal_shape)

        converged = False
        w, t, prev_obj = z, 1.0, np.inf
        for _ in range(cfg.max_iter):
            if cfg.accelerate:
                x_new = x_step(w, x)
                z_new = prox_l1_minus_alpha_l2(frame.analysis(x_new), lam / rho, alpha)
            else:
                z_new = prox_l1_minus_alpha_l2(frame.analysis(x), lam / rho, alpha)
                x_new = x_step(z_new, x)
            num = np.sqrt(np.sum((x_new - x) ** 2) + np.sum((z_new - z) ** 2))
            den = np.sqrt(np.sum(x ** 2) + np.sum(z ** 2))
            rel = float(num / den) if den > 0 else (0.0 if num == 0 else float("inf"))
            obj = objective_rasso(x_new, z_new, A, b, frame, lam, alpha, rho)
            if cfg.accelerate:
                if obj > prev_obj:
                    t, w = 1.0, z_new
                else:
                    t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
                    w = z_new + ((t - 1.0) / t_new) * (z_new - z)
                    t = t_new
            prev_obj = obj
            x, z = x_new, z_new
            total += 1
            rel_trace.append(rel)
            stage_trace.append(stage)
            obj_trace.append(obj)
            if rel < tol:
                converged = True
                break
        if cfg.accelerate:
            # pair the returned x with the returned z
            x = x_step(z, x)
    return SolveReport(x=x, objective_trace=obj_trace, rel_change_trace=rel_trace,
                       iterations=total, converged=converged,
                       wall_time=time.perf_counter() - start, lam_schedule=[lam],
                       stage_trace=stage_trace, z=z)


def _shifted_normal(A: LinearOperator, rho: float):
    shape = A.domain_shape

    def apply(v):
        v = v.reshape(shape)
        return (A.normal(v) + rho * v).ravel()

    return apply
