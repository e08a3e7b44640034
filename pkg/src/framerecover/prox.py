"""Proximal operators for l1, l1 - alpha*l2 and lp (0 < p < 1) penalties.

Each ``prox_*`` returns a global minimizer of ``0.5*||x - b||^2 + lam*R(x)``.
The functions accept arrays of any shape; norms are taken over all entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "ProxSpec",
    "prox_l1",
    "prox_l1_minus_alpha_l2",
    "prox_lp",
    "prox_lp_scalar",
    "lp_threshold",
    "apply_prox",
    "penalty",
    "l1_minus_alpha_l2",
]

KINDS = ("l1", "l1_minus_alpha_l2", "lp")


@dataclass(frozen=True)
class ProxSpec:
    """Which regularizer to use, and its weight.

    ``alpha`` is only read for ``l1_minus_alpha_l2`` and ``p`` only for ``lp``.
    """

    kind: str
    lam: float
    alpha: Optional[float] = None
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown prox kind {self.kind!r}; expected one of {KINDS}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.kind == "l1_minus_alpha_l2":
            if self.alpha is None or not 0 < self.alpha <= 1:
                raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.kind == "lp":
            if self.p is None or not 0 < self.p < 1:
                raise ValueError(f"p must lie in (0, 1), got {self.p}")

    def with_lam(self, lam: float) -> "ProxSpec":
        return ProxSpec(self.kind, lam, self.alpha, self.p)

    @property
    def label(self) -> str:
        if self.kind == "l1":
            return "l1"
        if self.kind == "lp":
            return f"lp_{self.p:g}"
        return "l1l2" if self.alpha == 1 else f"l1l2_{self.alpha:g}"


def prox_l1(b, lam):
    """Soft thresholding."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    b = np.asarray(b, dtype=float)
    return np.sign(b) * np.maximum(np.abs(b) - lam, 0.0)


def prox_l1_minus_alpha_l2(b, lam, alpha):
    """Prox of ``lam * (||x||_1 - alpha*||x||_2)`` for ``0 < alpha <= 1``.

    Three regimes depending on ``||b||_inf``:

    * above ``lam``: soft-threshold, then stretch radially by ``alpha*lam``;
    * in ``((1-alpha)*lam, lam]``: a single spike at the first index of
      largest magnitude, of size ``||b||_inf - (1-alpha)*lam``;
    * otherwise zero.

    The minimizer is not unique on some boundaries; the first maximal index is
    a deterministic choice, not a canonical one.
    """
    b = np.asarray(b, dtype=float)
    if lam < 0 or not 0 <= alpha <= 1:
        raise ValueError("need lam >= 0 and 0 <= alpha <= 1")
    if b.size == 0:
        return b.copy()
    flat = b.ravel()
    i = int(np.argmax(np.abs(flat)))
    top = abs(flat[i])
    if top > lam:
        z = prox_l1(b, lam)
        zn = np.linalg.norm(z)
        return z * ((zn + alpha * lam) / zn)
    out = np.zeros_like(b)
    if top > (1.0 - alpha) * lam:
        out.ravel()[i] = np.sign(flat[i]) * (top + (alpha - 1.0) * lam)
    return out


def lp_threshold(lam, p):
    """Magnitude of ``b`` below which the scalar lp prox returns zero."""
    base = 2.0 * lam * (1.0 - p)
    return base ** (1.0 / (2.0 - p)) + lam * p * base ** ((p - 1.0) / (2.0 - p))


def prox_lp(b, lam, p, tol: float = 1e-12, max_iter: int = 100):
    """Componentwise prox of ``lam * |x|^p``, ``0 < p < 1``.

    Above the threshold the nonzero candidate is the larger root of
    ``x + lam*p*x^(p-1) = |b|``, found by Newton's method from ``|b|``
    safeguarded by bisection on ``[(2*lam*(1-p))^(1/(2-p)), |b|]``. The
    candidate is kept only if it beats zero in objective value.
    """
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    b = np.asarray(b, dtype=float)
    if lam <= 0:
        return b.copy()
    out = np.zeros_like(b)
    mag = np.abs(b)
    active = mag > lp_threshold(lam, p)
    if not np.any(active):
        return out
    y = mag[active]
    lo = np.full_like(y, (2.0 * lam * (1.0 - p)) ** (1.0 / (2.0 - p)))
    hi = y.copy()
    x = y.copy()
    lp = lam * p
    done = np.zeros(y.shape, dtype=bool)
    for _ in range(max_iter):
        f = x + lp * x ** (p - 1.0) - y
        fp = 1.0 + lp * (p - 1.0) * x ** (p - 2.0)
        # f is increasing on the bracket: keep the sign-change interval.
        hi = np.where(f > 0, x, hi)
        lo = np.where(f <= 0, x, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = x - f / fp
        bad = ~np.isfinite(x_new) | (x_new < lo) | (x_new > hi)
        x_new = np.where(bad, 0.5 * (lo + hi), x_new)
        step = np.abs(x_new - x)
        x = np.where(done, x, x_new)
        done |= step <= tol * np.maximum(1.0, x)
        if done.all():
            break
    if not done.all():
        idx = np.flatnonzero(~done)
        for k in idx:
            x[k] = _lp_grid_minimizer(y[k], lam, p)
    keep = 0.5 * (x - y) ** 2 + lam * x ** p < 0.5 * y ** 2
    out[active] = np.where(keep, x, 0.0) * np.sign(b[active])
    return out


def _lp_grid_minimizer(y, lam, p, points: int = 20001):
    """Fallback for nonconvergent Newton runs: dense grid plus golden refinement."""
    grid = np.linspace(0.0, y, points)
    obj = 0.5 * (grid - y) ** 2 + lam * grid ** p
    k = int(np.argmin(obj))
    a = grid[max(k - 1, 0)]
    c = grid[min(k + 1, points - 1)]
    g = (np.sqrt(5.0) - 1.0) / 2.0
    f = lambda t: 0.5 * (t - y) ** 2 + lam * t ** p  # noqa: E731
    for _ in range(200):
        x1 = c - g * (c - a)
        x2 = a + g * (c - a)
        if f(x1) < f(x2):
            c = x2
        else:
            a = x1
    return 0.5 * (a + c)


def prox_lp_scalar(b: float, lam: float, p: float) -> float:
    return float(prox_lp(np.array([b], dtype=float), lam, p)[0])


def l1_minus_alpha_l2(z, alpha) -> float:
    z = np.ravel(z)
    return float(np.sum(np.abs(z)) - alpha * np.linalg.norm(z))


def penalty(spec: ProxSpec, z) -> float:
    """Unweighted regularizer value ``R(z)`` (multiply by ``spec.lam`` for the objective)."""
    z = np.ravel(z)
    if spec.kind == "l1":
        return float(np.sum(np.abs(z)))
    if spec.kind == "l1_minus_alpha_l2":
        return l1_minus_alpha_l2(z, spec.alpha)
    return float(np.sum(np.abs(z) ** spec.p))


def apply_prox(spec: ProxSpec, b, scale: float = 1.0):
    """Prox of ``scale * spec.lam * R`` evaluated at ``b``."""
    w = spec.lam * scale
    if spec.kind == "l1":
        return prox_l1(b, w)
    if spec.kind == "l1_minus_alpha_l2":
        return prox_l1_minus_alpha_l2(b, w, spec.alpha)
    return prox_lp(b, w, spec.p)
