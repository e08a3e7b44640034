import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from framerecover.prox import (
    ProxSpec,
    apply_prox,
    l1_minus_alpha_l2,
    lp_threshold,
    penalty,
    prox_l1,
    prox_l1_minus_alpha_l2,
    prox_lp,
    prox_lp_scalar,
)
from oracles import (
    l1l2_prox_objective,
    l1l2_prox_oracle,
    lp_prox_objective,
    lp_prox_oracle,
)

vec = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=3).map(np.array)


# -- prox_l1 -----------------------------------------------------------------

def test_soft_threshold_textbook():
    assert np.allclose(prox_l1(np.array([3.0, -1.0]), 1.0), [2.0, 0.0])


def test_soft_threshold_zero_weight():
    b = np.array([0.3, -2.0, 0.0])
    assert np.array_equal(prox_l1(b, 0.0), b)


def test_soft_threshold_matches_grid_oracle():
    b = np.array([1.3, -0.4, 2.2])
    x = prox_l1(b, 0.7)
    obj = lambda v: 0.5 * np.sum((v - b) ** 2) + 0.7 * np.sum(np.abs(v))  # noqa: E731
    # separable, so a 1-D grid on [-5, 5] per coordinate is exhaustive
    g = np.linspace(-5, 5, 100001)
    best = sum(np.min(0.5 * (g - bi) ** 2 + 0.7 * np.abs(g)) for bi in b)
    assert obj(x) <= best + 1e-8


def test_soft_threshold_rejects_negative_weight():
    with pytest.raises(ValueError):
        prox_l1(np.ones(2), -1.0)


# -- prox_l1_minus_alpha_l2 --------------------------------------------------

def test_l1l2_zero_input():
    assert np.array_equal(prox_l1_minus_alpha_l2(np.zeros(3), 1.0, 0.5), np.zeros(3))


def test_l1l2_stretch_case():
    b = np.array([1.5, 0.5])
    x = prox_l1_minus_alpha_l2(b, 1.0, 1.0)
    assert np.allclose(x, [1.5, 0.0])
    _, best = l1l2_prox_oracle(b, 1.0, 1.0)
    assert l1l2_prox_objective(x, b, 1.0, 1.0) <= best + 1e-10


def test_l1l2_zero_case():
    b = np.array([0.3, 0.1])
    x = prox_l1_minus_alpha_l2(b, 1.0, 0.5)
    assert np.array_equal(x, np.zeros(2))
    _, best = l1l2_prox_oracle(b, 1.0, 0.5)
    assert l1l2_prox_objective(x, b, 1.0, 0.5) <= best + 1e-10


def test_l1l2_spike_case_and_tie_break():
    b = np.array([-0.8, 0.8, 0.1])
    x = prox_l1_minus_alpha_l2(b, 1.0, 0.5)
    # first index of maximal magnitude, size 0.8 - 0.5
    assert np.allclose(x, [-0.3, 0.0, 0.0])


def test_l1l2_small_alpha_matches_l1():
    for k in range(20):
        b = np.random.default_rng(k).normal(0, 2, 5)
        assert np.allclose(prox_l1_minus_alpha_l2(b, 0.8, 1e-12), prox_l1(b, 0.8), atol=1e-8)


@pytest.mark.parametrize("alpha", [0.3, 1.0])
def test_l1l2_branch_boundary_objective_continuity(alpha):
    lam = 1.0
    v = []
    for top in (lam - 1e-9, lam + 1e-9, (1 - alpha) * lam - 1e-9, (1 - alpha) * lam + 1e-9):
        b = np.array([top, 0.3 * top])
        x = prox_l1_minus_alpha_l2(b, lam, alpha)
        v.append(l1l2_prox_objective(x, b, lam, alpha))
    assert abs(v[0] - v[1]) < 1e-7
    assert abs(v[2] - v[3]) < 1e-7


@settings(max_examples=100, deadline=None)
@given(vec, st.floats(0.01, 3.0), st.floats(0.01, 1.0))
def test_l1l2_oracle_dominance_property(b, lam, alpha):
    x = prox_l1_minus_alpha_l2(b, lam, alpha)
    _, best = l1l2_prox_oracle(b, lam, alpha)
    assert l1l2_prox_objective(x, b, lam, alpha) <= best + 1e-6


@settings(max_examples=50, deadline=None)
@given(vec, st.floats(0.01, 3.0), st.floats(0.01, 1.0))
def test_l1l2_first_order_condition(b, lam, alpha):
    x = prox_l1_minus_alpha_l2(b, lam, alpha)
    nx = np.linalg.norm(x)
    assume(nx > 1e-8 and np.all((np.abs(x) > 1e-8) | (x == 0)))
    # on the support: x - b + lam*(sign(x) - alpha*x/||x||) = 0
    S = x != 0
    g = x[S] - b[S] + lam * (np.sign(x[S]) - alpha * x[S] / nx)
    assert np.max(np.abs(g)) < 1e-9 * max(1.0, np.max(np.abs(b)))


def test_l1l2_rejects_bad_alpha():
    with pytest.raises(ValueError):
        prox_l1_minus_alpha_l2(np.ones(2), 1.0, 1.5)


# -- prox_lp -----------------------------------------------------------------

def test_lp_zero_input():
    assert prox_lp_scalar(0.0, 1.0, 0.5) == 0.0


def test_lp_large_input_finds_stationary_root():
    b, lam, p = 10.0, 0.5, 0.5
    x = prox_lp_scalar(b, lam, p)
    assert abs(x + lam * p * x ** (p - 1) - b) < 1e-10
    xo, _ = lp_prox_oracle(b, lam, p)
    assert abs(x - xo) < 1e-6


@pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
def test_lp_threshold_boundary(p):
    lam = 0.7
    thr = lp_threshold(lam, p)
    below = thr * (1 - 1e-6)
    assert prox_lp_scalar(below, lam, p) == 0.0
    _, best = lp_prox_oracle(below, lam, p)
    assert lp_prox_objective(0.0, below, lam, p) <= best + 1e-12
    assert prox_lp_scalar(thr * (1 + 1e-3), lam, p) > 0.0


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_lp_threshold_is_indifference_point(p):
    lam = 1.3
    thr = lp_threshold(lam, p)
    x = prox_lp(np.array([thr * (1 + 1e-9)]), lam, p)[0]
    assert abs(lp_prox_objective(x, thr, lam, p) - 0.5 * thr ** 2) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(-8, 8, allow_nan=False), st.floats(0.01, 3.0), st.floats(0.05, 0.95))
def test_lp_oracle_dominance_property(b, lam, p):
    x = prox_lp_scalar(b, lam, p)
    _, best = lp_prox_oracle(b, lam, p)
    assert lp_prox_objective(x, b, lam, p) <= best + 1e-6
    assert x == 0.0 or np.sign(x) == np.sign(b)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=10),
       st.floats(0.01, 2.0), st.floats(1.0, 4.0), st.floats(0.05, 0.95))
def test_lp_support_shrinks_with_lambda(b, lam, factor, p):
    b = np.array(b)
    small = np.count_nonzero(prox_lp(b, lam, p))
    large = np.count_nonzero(prox_lp(b, lam * factor, p))
    assert large <= small


def test_lp_vector_matches_scalar():
    b = np.array([-3.0, 0.2, 1.1, 7.5])
    out = prox_lp(b, 0.6, 0.4)
    assert np.allclose(out, [prox_lp_scalar(v, 0.6, 0.4) for v in b])


def test_lp_rejects_bad_p():
    with pytest.raises(ValueError):
        prox_lp(np.ones(2), 1.0, 1.0)


# -- ProxSpec ----------------------------------------------------------------

def test_spec_validation():
    with pytest.raises(ValueError):
        ProxSpec("l2", 1.0)
    with pytest.raises(ValueError):
        ProxSpec("l1", 0.0)
    with pytest.raises(ValueError):
        ProxSpec("l1_minus_alpha_l2", 1.0)
    with pytest.raises(ValueError):
        ProxSpec("lp", 1.0, p=1.2)


def test_spec_labels_and_penalty():
    z = np.array([3.0, -4.0])
    assert ProxSpec("l1", 1.0).label == "l1"
    assert ProxSpec("l1_minus_alpha_l2", 1.0, alpha=1.0).label == "l1l2"
    assert ProxSpec("lp", 1.0, p=0.5).label == "lp_0.5"
    assert penalty(ProxSpec("l1", 2.0), z) == 7.0
    assert np.isclose(penalty(ProxSpec("l1_minus_alpha_l2", 1.0, alpha=0.5), z), 4.5)
    assert np.isclose(l1_minus_alpha_l2(z, 1.0), 2.0)
    assert np.isclose(penalty(ProxSpec("lp", 1.0, p=0.5), z), np.sqrt(3) + 2)


def test_apply_prox_scales_weight():
    b = np.array([2.0, -0.5])
    spec = ProxSpec("l1", 0.5)
    assert np.allclose(apply_prox(spec, b, scale=2.0), prox_l1(b, 1.0))
    assert spec.with_lam(0.1).lam == 0.1
