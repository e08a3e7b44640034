import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from framerecover.frames import (
    DB4_LOWPASS,
    DenseFrame,
    WaveletSpec,
    canonical_dual,
    identity_frame,
    orthogonal_complement,
    random_tight_frame,
    sidwt_frame,
    tightness_error,
)
from framerecover.linalg import derive_seed, gaussian, thin_svd


def _round_trip(frame, x):
    return np.linalg.norm(frame.synthesis(frame.analysis(x)) - x) / np.linalg.norm(x)


# -- random_tight_frame ------------------------------------------------------

def test_square_frame_is_orthogonal():
    D = random_tight_frame(4, 4, 0).matrix
    assert np.allclose(D @ D.T, np.eye(4), atol=1e-12)
    assert np.allclose(D.T @ D, np.eye(4), atol=1e-12)


def test_redundant_frame_is_tight():
    D = random_tight_frame(4, 8, 0).matrix
    assert np.max(np.abs(D @ D.T - np.eye(4))) < 1e-10


def test_redundant_frame_singular_values_are_one():
    D = random_tight_frame(4, 8, 0).matrix
    assert np.allclose(thin_svd(D)[1], 1.0, atol=1e-12)


def test_random_frame_deterministic():
    a = random_tight_frame(5, 9, 17).matrix
    assert np.array_equal(a, random_tight_frame(5, 9, 17).matrix)
    assert not np.array_equal(a, random_tight_frame(5, 9, 18).matrix)


def test_random_frame_rejects_underdetermined():
    with pytest.raises(ValueError):
        random_tight_frame(5, 4, 0)


def test_dense_frame_rejects_non_tight():
    with pytest.raises(ValueError):
        DenseFrame(2.0 * np.eye(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(0, 12), st.integers(0, 2 ** 31))
def test_dense_frame_identities(n, extra, seed):
    frame = random_tight_frame(n, n + extra, seed)
    D = frame.matrix
    x, y = gaussian(n, seed + 1), gaussian(n, seed + 2)
    c = gaussian(n + extra, seed + 3)
    assert _round_trip(frame, x) < 1e-10
    # adjointness of analysis and synthesis
    assert np.isclose(np.dot(frame.analysis(x), c), np.dot(x, frame.synthesis(c)), atol=1e-10)
    comp = orthogonal_complement(frame)
    assert comp.rows == extra
    v, w = gaussian(n + extra, seed + 4), gaussian(n + extra, seed + 5)
    assert abs(v @ v - (D @ v) @ (D @ v) - comp.apply(v) @ comp.apply(v)) < 1e-10
    assert abs(v @ w - (D @ v) @ (D @ w) - comp.apply(v) @ comp.apply(w)) < 1e-10
    assert np.isclose(frame.analysis(x) @ frame.analysis(y), x @ y, atol=1e-10)


# -- canonical_dual and orthogonal_complement --------------------------------

def test_dual_of_tight_frame_is_synthesis():
    frame = random_tight_frame(4, 8, 3)
    Phi = canonical_dual(frame)
    for k in range(20):
        c = gaussian(8, derive_seed(1, k))
        assert np.max(np.abs(Phi.forward(c) - frame.synthesis(c))) < 1e-12


def test_dual_of_identity():
    Phi = canonical_dual(identity_frame(5))
    v = gaussian(5, 0)
    assert np.allclose(Phi.forward(v), v)


def test_dual_recovers_signal():
    frame = random_tight_frame(4, 8, 4)
    Phi = canonical_dual(frame)
    for k in range(20):
        v = gaussian(4, derive_seed(2, k))
        assert np.linalg.norm(Phi.forward(frame.analysis(v)) - v) < 1e-10


def test_dual_of_sidwt_is_synthesis():
    frame = sidwt_frame(WaveletSpec(levels=2, dimensionality=1), 16)
    c = gaussian(frame.coef_shape, 0)
    assert np.allclose(canonical_dual(frame).forward(c), frame.synthesis(c))


def test_complement_square_frame_is_empty():
    frame = random_tight_frame(5, 5, 1)
    comp = orthogonal_complement(frame)
    assert comp.rows == 0
    v = gaussian(5, 2)
    assert np.isclose(v @ v, np.sum((frame.matrix @ v) ** 2))


def test_complement_pythagorean_n4_d8():
    frame = random_tight_frame(4, 8, 7)
    comp = orthogonal_complement(frame)
    for k in range(50):
        v = gaussian(8, derive_seed(3, k))
        lhs = v @ v
        rhs = np.sum((frame.matrix @ v) ** 2) + np.sum(comp.apply(v) ** 2)
        assert abs(lhs - rhs) < 1e-10


def test_complement_needs_dense_frame():
    with pytest.raises(TypeError):
        orthogonal_complement(sidwt_frame(WaveletSpec(levels=1, dimensionality=1), 8))


# -- sidwt_frame -------------------------------------------------------------

def test_db4_filter_normalization():
    assert np.isclose(DB4_LOWPASS.sum(), np.sqrt(2.0), atol=1e-13)
    assert np.isclose(np.sum(DB4_LOWPASS ** 2), 1.0, atol=1e-13)


def test_sidwt_constant_signal_has_no_detail():
    frame = sidwt_frame(WaveletSpec(levels=1, dimensionality=1), 32)
    c = frame.analysis(np.full(32, 3.0))
    assert np.max(np.abs(c[1:])) < 1e-12


def test_sidwt_smooth_signal_detail_vanishes():
    # four vanishing moments: cubic polynomials are annihilated away from the wrap
    frame = sidwt_frame(WaveletSpec(levels=1, dimensionality=1), 64)
    t = np.arange(64, dtype=float)
    c = frame.analysis(1.0 + 0.5 * t - 0.01 * t ** 2 + 1e-4 * t ** 3)
    interior = c[1, 8:56]
    assert np.max(np.abs(interior)) < 1e-9


@pytest.mark.parametrize("k", range(5))
def test_sidwt_1d_round_trip(k):
    frame = sidwt_frame(WaveletSpec(levels=4, dimensionality=1), 64)
    assert frame.coef_shape == (5, 64)
    assert _round_trip(frame, gaussian(64, k)) < 1e-8


@pytest.mark.parametrize("k", range(5))
def test_sidwt_2d_round_trip(k):
    frame = sidwt_frame(WaveletSpec(levels=2, dimensionality=2), (32, 32))
    assert frame.d == 32 * 32 * 7
    assert _round_trip(frame, gaussian((32, 32), k)) < 1e-8


def test_sidwt_adjointness():
    frame = sidwt_frame(WaveletSpec(levels=3, dimensionality=2), (16, 16))
    x = gaussian((16, 16), 1)
    c = gaussian(frame.coef_shape, 2)
    assert np.isclose(np.sum(frame.analysis(x) * c), np.sum(x * frame.synthesis(c)), rtol=1e-12)


def test_sidwt_tightness_error():
    frame = sidwt_frame(WaveletSpec(levels=2, dimensionality=1), 16)
    assert tightness_error(frame) < 1e-12


@pytest.mark.parametrize("shift", [1, 5, 17])
def test_sidwt_shift_invariance(shift):
    frame = sidwt_frame(WaveletSpec(levels=3, dimensionality=1), 64)
    x = gaussian(64, shift)
    shifted = frame.analysis(np.roll(x, shift))
    assert np.max(np.abs(shifted - np.roll(frame.analysis(x), shift, axis=-1))) < 1e-10


def test_sidwt_shift_invariance_2d():
    frame = sidwt_frame(WaveletSpec(levels=2, dimensionality=2), (16, 16))
    x = gaussian((16, 16), 3)
    lhs = frame.analysis(np.roll(x, (3, -5), axis=(0, 1)))
    rhs = np.roll(frame.analysis(x), (3, -5), axis=(1, 2))
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_haar_family():
    frame = sidwt_frame(WaveletSpec("haar", levels=2, dimensionality=1), 8)
    assert _round_trip(frame, gaussian(8, 0)) < 1e-12


@pytest.mark.parametrize("kwargs", [
    {"levels": 0},
    {"dimensionality": 3},
    {"boundary": "symmetric"},
    {"family": "sym8"},
])
def test_wavelet_spec_validation(kwargs):
    with pytest.raises(ValueError):
        WaveletSpec(**kwargs)


def test_sidwt_rejects_bad_shapes():
    with pytest.raises(ValueError):
        sidwt_frame(WaveletSpec(levels=1, dimensionality=1), 24)
    with pytest.raises(ValueError):
        sidwt_frame(WaveletSpec(levels=4, dimensionality=1), 8)
    with pytest.raises(ValueError):
        sidwt_frame(WaveletSpec(levels=1, dimensionality=2), 16)
