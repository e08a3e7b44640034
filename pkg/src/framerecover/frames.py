"""Tight frames: dense random frames and the undecimated Daubechies wavelet frame.

All frames here are Parseval frames, ``D D^T = I_n``. The analysis operator
``D^T`` maps a signal to its coefficients and the synthesis operator ``D`` maps
coefficients back; ``synthesis(analysis(x)) == x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import LinearOperator, MatrixOperator, gaussian, is_power_of_two, thin_svd

__all__ = [
    "TightFrame",
    "DenseFrame",
    "SIDWTFrame",
    "ComplementFrame",
    "WaveletSpec",
    "DB4_LOWPASS",
    "random_tight_frame",
    "identity_frame",
    "canonical_dual",
    "orthogonal_complement",
    "sidwt_frame",
    "tightness_error",
]

# Daubechies order-4 (8-tap) scaling filter, sum = sqrt(2).
DB4_LOWPASS = np.array([
    0.230377813308897,
    0.714846570552915,
    0.630880767929859,
    -0.027983769416859,
    -0.187034811719093,
    0.030841381835561,
    0.032883011666885,
    -0.010597401785069,
])


class TightFrame:
    """Common interface for Parseval frames.

    Subclasses provide ``analysis`` (``D^T``) and ``synthesis`` (``D``) plus the
    signal and coefficient shapes.
    """

    kind = "abstract"
    signal_shape: tuple
    coef_shape: tuple

    @property
    def n(self) -> int:
        return int(np.prod(self.signal_shape))

    @property
    def d(self) -> int:
        return int(np.prod(self.coef_shape))

    def analysis(self, x):
        raise NotImplementedError

    def synthesis(self, c):
        raise NotImplementedError

    def analysis_operator(self) -> LinearOperator:
        return LinearOperator(self.analysis, self.synthesis, (self.d, self.n),
                              name=f"{self.kind}-analysis",
                              domain_shape=self.signal_shape)

    def synthesis_operator(self) -> LinearOperator:
        return LinearOperator(self.synthesis, self.analysis, (self.n, self.d),
                              name=f"{self.kind}-synthesis",
                              domain_shape=self.coef_shape)


class DenseFrame(TightFrame):
    """Frame stored as an explicit ``n x d`` matrix ``D``."""

    kind = "dense"

    def __init__(self, D, check: bool = True, tol: float = 1e-10):
        D = np.array(D, dtype=float)
        if D.ndim != 2:
            raise ValueError(f"frame matrix must be 2-D, got shape {D.shape}")
        n, d = D.shape
        if d < n:
            raise ValueError(f"frame needs d >= n, got n={n}, d={d}")
        if check:
            err = np.max(np.abs(D @ D.T - np.eye(n)))
            if err >= tol:
                raise ValueError(f"matrix is not a tight frame: max|DD^T - I| = {err:.3e}")
        D.setflags(write=False)
        self.matrix = D
        self.signal_shape = (n,)
        self.coef_shape = (d,)

    def analysis(self, x):
        return self.matrix.T @ x

    def synthesis(self, c):
        return self.matrix @ c

    def __repr__(self):
        return f"DenseFrame(n={self.n}, d={self.d})"


@dataclass(frozen=True)
class ComplementFrame:
    """Rows completing a dense tight frame to an orthonormal basis of R^d."""

    matrix: np.ndarray

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    def apply(self, v):
        return self.matrix @ v

    def adjoint(self, w):
        return self.matrix.T @ w


def random_tight_frame(n: int, d: int, seed: int) -> DenseFrame:
    """Random Parseval frame from the SVD of a Gaussian ``n x d`` matrix.

    The singular values are replaced by a constant, which makes the rows
    orthogonal with common norm; rescaling that constant to one gives
    ``D D^T = I_n``.
    """
    if n < 1 or d < n:
        raise ValueError(f"need d >= n >= 1, got n={n}, d={d}")
    E = gaussian((n, d), seed)
    U, _, V = thin_svd(E)
    tau = np.sqrt(d / n)
    D = (U * tau) @ V.T
    return DenseFrame(D * np.sqrt(n / d))


def identity_frame(n: int) -> DenseFrame:
    return DenseFrame(np.eye(n))


def canonical_dual(frame: TightFrame) -> LinearOperator:
    """Canonical dual ``(D D^T)^{-1} D`` as an operator on coefficients."""
    if isinstance(frame, DenseFrame):
        D = frame.matrix
        Phi = np.linalg.solve(D @ D.T, D)
        return MatrixOperator(Phi, name="canonical-dual")
    # Matrix-free frames here are Parseval by construction, so the dual is D.
    return frame.synthesis_operator()


def orthogonal_complement(frame: DenseFrame) -> ComplementFrame:
    if not isinstance(frame, DenseFrame):
        raise TypeError("orthogonal complement needs an explicit dense frame")
    D = frame.matrix
    n, d = D.shape
    if d == n:
        return ComplementFrame(np.zeros((0, d)))
    _, _, Vt = np.linalg.svd(D, full_matrices=True)
    return ComplementFrame(np.ascontiguousarray(Vt[n:]))


def tightness_error(frame: TightFrame) -> float:
    """``max |D D^T - I|`` probed on the canonical basis of the signal space."""
    worst = 0.0
    eye = np.eye(frame.n)
    for i in range(frame.n):
        e = eye[i].reshape(frame.signal_shape)
        r = frame.synthesis(frame.analysis(e)) - e
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


# -- undecimated wavelet frame ------------------------------------------------

@dataclass(frozen=True)
class WaveletSpec:
    family: str = "db4"
    levels: int = 4
    dimensionality: int = 2
    boundary: str = "periodic"

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.dimensionality not in (1, 2):
            raise ValueError("dimensionality must be 1 or 2")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")
        if self.family not in _FILTERS:
            raise ValueError(f"unknown wavelet family {self.family!r}")


_FILTERS = {"db4": DB4_LOWPASS, "haar": np.array([1.0, 1.0]) / np.sqrt(2.0)}


def _qmf_highpass(h):
    k = np.arange(len(h))
    return ((-1.0) ** k) * h[::-1]


def _upsampled_response(filt, level: int, N: int):
    """DFT (length N) of ``filt`` dilated by ``2**(level-1)``, wrapped periodically."""
    step = 2 ** (level - 1)
    taps = np.zeros(N)
    np.add.at(taps, (np.arange(len(filt)) * step) % N, filt)
    return np.fft.fft(taps)


def _band_responses_1d(h, levels: int, N: int):
    """Per-band frequency responses, approximation band first.

    Each level's filters are scaled by 1/sqrt(2) so that the squared responses
    sum to one at every frequency (Parseval).
    """
    g = _qmf_highpass(h)
    approx = np.ones(N, dtype=complex)
    details = []
    for j in range(1, levels + 1):
        Hj = _upsampled_response(h, j, N) / np.sqrt(2.0)
        Gj = _upsampled_response(g, j, N) / np.sqrt(2.0)
        details.append(Gj * approx)
        approx = Hj * approx
    return approx, details


class SIDWTFrame(TightFrame):
    """Shift-invariant (undecimated) wavelet frame with periodic boundaries.

    Every band is a circular convolution of the signal, computed in the
    Fourier domain; this is the same operator as the a-trous filter bank.
    Coefficients have shape ``(bands,) + signal_shape`` with the coarse
    approximation first, then the detail bands level by level
    (``LH, HL, HH`` per level in 2-D).
    """

    kind = "sidwt"

    def __init__(self, spec: WaveletSpec, signal_shape):
        signal_shape = tuple(int(s) for s in np.atleast_1d(signal_shape))
        if len(signal_shape) != spec.dimensionality:
            raise ValueError(f"signal shape {signal_shape} does not match "
                             f"{spec.dimensionality}-D wavelet spec")
        for side in signal_shape:
            if not is_power_of_two(side):
                raise ValueError(f"side {side} is not a power of two")
            if side < 2 ** spec.levels:
                raise ValueError(f"side {side} too small for {spec.levels} levels")
        self.spec = spec
        self.signal_shape = signal_shape
        h = _FILTERS[spec.family]
        if spec.dimensionality == 1:
            (N,) = signal_shape
            approx, details = _band_responses_1d(h, spec.levels, N)
            bands = [approx] + details
            self._resp = np.stack([b[: N // 2 + 1] for b in bands])
        else:
            R, C = signal_shape
            a_r, d_r = _band_responses_1d(h, spec.levels, R)
            a_c, d_c = _band_responses_1d(h, spec.levels, C)
            bands = [np.outer(a_r, a_c)]
            for j in range(spec.levels):
                pre_r = _approx_before(h, j + 1, R)
                pre_c = _approx_before(h, j + 1, C)
                Hr = _upsampled_response(h, j + 1, R) / np.sqrt(2.0) * pre_r
                Hc = _upsampled_response(h, j + 1, C) / np.sqrt(2.0) * pre_c
                bands.append(np.outer(Hr, d_c[j]))     # low rows, high cols
                bands.append(np.outer(d_r[j], Hc))     # high rows, low cols
                bands.append(np.outer(d_r[j], d_c[j]))  # high rows, high cols
            self._resp = np.stack([b[:, : C // 2 + 1] for b in bands])
        self._resp_conj = np.conj(self._resp)
        self.coef_shape = (self._resp.shape[0],) + signal_shape

    @property
    def bands(self) -> int:
        return self.coef_shape[0]

    def analysis(self, x):
        x = np.asarray(x, dtype=float).reshape(self.signal_shape)
        if len(self.signal_shape) == 1:
            X = np.fft.rfft(x)
            return np.fft.irfft(self._resp * X, n=self.signal_shape[0], axis=-1)
        X = np.fft.rfft2(x)
        return np.fft.irfft2(self._resp * X, s=self.signal_shape, axes=(-2, -1))

    def synthesis(self, c):
        c = np.asarray(c, dtype=float).reshape(self.coef_shape)
        if len(self.signal_shape) == 1:
            Cf = np.fft.rfft(c, axis=-1)
            return np.fft.irfft(np.sum(self._resp_conj * Cf, axis=0), n=self.signal_shape[0])
        Cf = np.fft.rfft2(c, axes=(-2, -1))
        return np.fft.irfft2(np.sum(self._resp_conj * Cf, axis=0), s=self.signal_shape)

    def __repr__(self):
        return f"SIDWTFrame({self.spec.family}, levels={self.spec.levels}, shape={self.signal_shape})"


def _approx_before(h, level: int, N: int):
    """Product of the scaled low-pass responses of levels ``1..level-1``."""
    out = np.ones(N, dtype=complex)
    for j in range(1, level):
        out = out * _upsampled_response(h, j, N) / np.sqrt(2.0)
    return out


def sidwt_frame(spec: WaveletSpec, signal_shape) -> SIDWTFrame:
    return SIDWTFrame(spec, signal_shape)
