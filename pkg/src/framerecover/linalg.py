"""Dense linear algebra, unitary FFTs and seeded Gaussian sampling.

Everything downstream (frames, solvers, certification) goes through the small
surface defined here, so the numerical conventions live in one place:

* FFTs are unitary (``1/sqrt(N)`` in both directions) and restricted to
  power-of-two lengths.
* Gaussian draws come from the counter-based Philox generator followed by a
  Box--Muller transform, keyed by an explicit integer seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "LinearOperator",
    "MatrixOperator",
    "IdentityOperator",
    "SpectrumEstimate",
    "ConvergenceError",
    "thin_svd",
    "symmetric_eig",
    "cg_solve",
    "fft",
    "fft2",
    "is_power_of_two",
    "power_iteration_norm",
    "derive_seed",
    "uniform",
    "generator",
    "choose",
    "gaussian",
    "as_operator",
]


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap.

    The last iterate and its residual are attached so callers can decide
    whether the partial result is usable.
    """

    def __init__(self, message: str, residual: float, iterate=None):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual
        self.iterate = iterate


class LinearOperator:
    """A linear map with an explicit adjoint.

    ``shape`` is ``(rows, cols)``: ``forward`` maps length-``cols`` inputs to
    length-``rows`` outputs (inputs may carry extra trailing structure, e.g.
    images, as long as ``forward``/``adjoint`` agree on it).
    """

    def __init__(self, forward: Callable, adjoint: Callable, shape, dtype=float,
                 name: str = "op", domain_shape=None):
        self._forward = forward
        self._adjoint = adjoint
        self.shape = tuple(shape)
        self.domain_shape = tuple(domain_shape) if domain_shape else (self.shape[1],)
        self.dtype = np.dtype(dtype)
        self.name = name

    def forward(self, x):
        return self._forward(x)

    def adjoint(self, y):
        return self._adjoint(y)

    def __call__(self, x):
        return self.forward(x)

    def normal(self, x):
        """Apply ``op^* op``; the result is real for real-domain operators."""
        out = self.adjoint(self.forward(x))
        if np.iscomplexobj(out) and not np.iscomplexobj(x):
            out = out.real
        return out

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, shape={self.shape})"


class MatrixOperator(LinearOperator):
    """Operator backed by an explicit dense matrix."""

    def __init__(self, matrix, name: str = "matrix"):
        M = np.asarray(matrix)
        if M.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix entries must be finite")
        self.matrix = M
        super().__init__(M.dot, M.conj().T.dot, M.shape, M.dtype, name)


class IdentityOperator(LinearOperator):
    def __init__(self, n: int, scale: float = 1.0):
        self.scale = scale
        super().__init__(lambda x: scale * np.asarray(x),
                         lambda y: np.conj(scale) * np.asarray(y),
                         (n, n), float, "identity")


@dataclass(frozen=True)
class SpectrumEstimate:
    value: float
    iterations: int
    residual: float


def thin_svd(M):
    """Economy SVD ``M = U diag(s) V^T`` with ``s`` in descending order.

    Returns ``(U, s, V)`` (note: ``V``, not ``V^T``).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"SVD did not converge: {exc}", float("nan")) from exc
    return U, s, Vt.T


def symmetric_eig(M, sym_tol: float = 1e-12):
    """Eigen-decomposition of a real symmetric matrix, eigenvalues ascending."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym >= sym_tol:
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    w, V = np.linalg.eigh(M)
    return w, V


def cg_solve(apply, rhs, tol: float = 1e-10, max_iter: int = 1000, x0=None):
    """Conjugate gradients for a self-adjoint positive-definite ``apply``.

    Stops once ``||apply(x) - rhs|| <= tol * ||rhs||``. Warm-starting from
    ``x0`` makes every CG step decrease the quadratic energy relative to
    ``x0``, which the relaxed solver relies on for monotonicity.
    """
    if isinstance(apply, LinearOperator):
        apply = apply.forward
    b = np.asarray(rhs, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)
    target = tol * bnorm
    r = b - apply(x)
    rr = float(np.vdot(r, r).real)
    if np.sqrt(rr) <= target:
        return x
    p = r.copy()
    for _ in range(max_iter):
        Ap = apply(p)
        pAp = float(np.vdot(p, Ap).real)
        if pAp <= 0.0:
            raise ValueError("operator is not positive definite along a search direction")
        step = rr / pAp
        x = x + step * p
        r = r - step * Ap
        rr_new = float(np.vdot(r, r).real)
        if np.sqrt(rr_new) <= target:
            return x
        p = r + (rr_new / rr) * p
        rr = rr_new
    res = float(np.linalg.norm(b - apply(x)))
    raise ConvergenceError(f"CG did not converge in {max_iter} iterations", res / bnorm, x)


def is_power_of_two(n: int) -> bool:
    n = int(n)
    return n >= 1 and (n & (n - 1)) == 0


def fft(v, inverse: bool = False):
    """Unitary 1-D DFT of a power-of-two length vector."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError("fft expects a 1-D vector; use fft2 for images")
    if not is_power_of_two(v.shape[0]):
        raise ValueError(f"length {v.shape[0]} is not a power of two")
    if inverse:
        return np.fft.ifft(v, norm="ortho")
    return np.fft.fft(v, norm="ortho")


def fft2(img, inverse: bool = False):
    """Unitary 2-D DFT on a grid whose sides are powers of two."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("fft2 expects a 2-D array")
    if not all(is_power_of_two(s) for s in img.shape):
        raise ValueError(f"grid {img.shape} does not have power-of-two sides")
    if inverse:
        return np.fft.ifft2(img, norm="ortho")
    return np.fft.fft2(img, norm="ortho")


def power_iteration_norm(op, tol: float = 1e-8, max_iter: int = 5000,
                         seed: int = 0) -> SpectrumEstimate:
    """Largest singular value of ``op`` by power iteration on ``op^* op``.

    The returned residual is ``||op^*op v - mu v|| / mu`` at the final unit
    vector ``v``.
    """
    if not isinstance(op, LinearOperator):
        op = MatrixOperator(op)
    v = gaussian(op.domain_shape, seed)
    v /= np.linalg.norm(v)
    mu = 0.0
    w = op.normal(v)
    for it in range(1, max_iter + 1):
        mu_new = float(np.vdot(v, w).real)
        wnorm = np.linalg.norm(w)
        if wnorm == 0.0:
            return SpectrumEstimate(0.0, it, 0.0)
        resid = float(np.linalg.norm(w - mu_new * v) / max(mu_new, 1e-300))
        if it > 1 and abs(mu_new - mu) <= 1e-3 * tol * mu_new and resid <= np.sqrt(tol):
            return SpectrumEstimate(float(np.sqrt(mu_new)), it, resid)
        mu = mu_new
        v = w / wnorm
        w = op.normal(v)
    mu = float(np.vdot(v, w).real)
    resid = float(np.linalg.norm(w - mu * v) / max(mu, 1e-300))
    return SpectrumEstimate(float(np.sqrt(max(mu, 0.0))), max_iter, resid)


# -- seeded sampling ---------------------------------------------------------

def derive_seed(master: int, *keys: int) -> int:
    """Hash a master seed and integer keys into an independent 64-bit seed."""
    ss = np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF,
                                 *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def generator(seed: int) -> np.random.Generator:
    """Philox-backed generator for callers that need many small draws."""
    return _philox(seed)


def uniform(shape, seed: int, low: float = 0.0, high: float = 1.0):
    return low + (high - low) * _philox(seed).random(shape)


def choose(population: int, k: int, seed: int) -> np.ndarray:
    """``k`` distinct indices from ``range(population)``, sorted."""
    return np.sort(_philox(seed).choice(population, size=k, replace=False))


def gaussian(shape, seed: int) -> np.ndarray:
    """Standard normal samples via Box--Muller on Philox uniforms."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    count = int(np.prod(shape, dtype=np.int64))
    half = (count + 1) // 2
    u = _philox(seed).random((2, half))
    radius = np.sqrt(-2.0 * np.log1p(-u[0]))   # 1 - u in (0, 1]
    angle = 2.0 * np.pi * u[1]
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:count]
    return z.reshape(shape)


def as_operator(A) -> LinearOperator:
    if isinstance(A, LinearOperator):
        return A
    return MatrixOperator(A)
