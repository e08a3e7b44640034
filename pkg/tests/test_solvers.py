import numpy as np
import pytest

from framerecover.experiments import make_instance
from framerecover.frames import identity_frame, random_tight_frame
from framerecover.linalg import MatrixOperator, derive_seed, gaussian
from framerecover.prox import ProxSpec, prox_l1_minus_alpha_l2
from framerecover.solvers import (
    RassoConfig,
    SolverConfig,
    SolverError,
    lambda_max,
    objective_asso,
    objective_rasso,
    pfista,
    solve_rasso,
    step_size,
)


@pytest.fixture(scope="module")
def inst32():
    return make_instance(32, 48, 24, 26, 5)


def _l1l2(lam, alpha=1.0):
    return ProxSpec("l1_minus_alpha_l2", lam, alpha=alpha)


# -- objectives --------------------------------------------------------------

def test_objective_zero_everything():
    frame = random_tight_frame(4, 6, 0)
    A = gaussian((3, 4), 1)
    assert objective_asso(np.zeros(4), A, np.zeros(3), frame, 0.5, 1.0) == 0.0


def test_objective_at_origin_is_half_residual():
    frame = random_tight_frame(4, 6, 0)
    A = gaussian((3, 4), 1)
    b = gaussian(3, 2)
    assert np.isclose(objective_asso(np.zeros(4), A, b, frame, 0.5, 1.0), 0.5 * b @ b)


def test_objectives_match_raw_definitions():
    frame = random_tight_frame(5, 8, 3)
    D = frame.matrix
    A, b, x, z = gaussian((4, 5), 1), gaussian(4, 2), gaussian(5, 3), gaussian(8, 4)
    lam, alpha, rho = 0.3, 0.7, 2.5
    c = D.T @ x
    F = lam * (np.abs(c).sum() - alpha * np.sqrt(c @ c)) + 0.5 * np.sum((A @ x - b) ** 2)
    assert abs(objective_asso(x, A, b, frame, lam, alpha) - F) < 1e-12
    G = (lam * (np.abs(z).sum() - alpha * np.sqrt(z @ z)) + 0.5 * np.sum((A @ x - b) ** 2)
         + 0.5 * rho * np.sum((c - z) ** 2))
    assert abs(objective_rasso(x, z, A, b, frame, lam, alpha, rho) - G) < 1e-12


# -- step size and lambda_max ------------------------------------------------

def test_auto_step_size():
    A = np.diag([2.0, 1.0])
    gamma, norm = step_size(A)
    assert np.isclose(norm, 2.0) and np.isclose(gamma, 0.99 / 4.0)


def test_step_size_rejects_unstable_step():
    with pytest.raises(ValueError):
        step_size(np.diag([2.0, 1.0]), 0.3)


def test_lambda_max_makes_zero_stationary():
    frame = random_tight_frame(6, 9, 1)
    A, b = gaussian((4, 6), 2), gaussian(4, 3)
    lm = lambda_max(A, b, frame)
    assert np.isclose(lm, np.max(np.abs(frame.matrix.T @ A.T @ b)))
    rep = pfista(A, b, frame, ProxSpec("l1", 1.01 * lm), SolverConfig(x0="zero", max_iter=50))
    assert np.allclose(rep.x, 0.0)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolverConfig(gamma=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(x0="random")
    with pytest.raises(ValueError):
        RassoConfig(rho=0.0)
    with pytest.raises(ValueError):
        RassoConfig(rho=1.0, rho_start=2.0)


# -- pfista ------------------------------------------------------------------

def test_first_iterations_follow_fista_recurrence():
    frame = random_tight_frame(4, 6, 2)
    A, b = gaussian((3, 4), 3), gaussian(3, 4)
    lam = 0.2
    gamma = 0.5 / np.linalg.norm(A, 2) ** 2
    rep = pfista(A, b, frame, _l1l2(lam), SolverConfig(gamma=gamma, max_iter=3, tol=0.0))
    D = frame.matrix
    step = lambda y: D @ prox_l1_minus_alpha_l2(D.T @ (y - gamma * A.T @ (A @ y - b)),  # noqa: E731
                                                gamma * lam, 1.0)
    x = A.T @ b
    y, t = x.copy(), 1.0
    for k in range(3):
        x_new = step(y)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        if k == 0:
            assert np.isclose(t_new, 1.6180339887, atol=1e-10)
        y = x_new + (t - 1) / t_new * (x_new - x)
        x, t = x_new, t_new
    assert np.allclose(rep.x, x, atol=1e-14)


def test_identity_system_recovers_signal():
    x0 = np.zeros(8)
    x0[2] = 1.5
    rep = pfista(np.eye(8), x0, identity_frame(8), _l1l2(1e-10), SolverConfig(max_iter=50))
    assert np.linalg.norm(rep.x - x0) / np.linalg.norm(x0) < 1e-6
    assert rep.iterations <= 50


def test_orthogonal_frame_exact_recovery():
    ok = 0
    for trial in range(20):
        inst = make_instance(64, 64, 48, 58, derive_seed(21, trial))
        lam = 1e-5 * lambda_max(inst.A, inst.b, inst.frame)
        rep = pfista(inst.A, inst.b, inst.frame, _l1l2(lam),
                     SolverConfig(continuation=10, track_objective=False))
        ok += np.linalg.norm(rep.x - inst.x0) / np.linalg.norm(inst.x0) < 1e-2
    assert ok >= 16


def test_fixed_point_certificate(inst32):
    lam = 0.05 * np.linalg.norm(inst32.b)
    tol = 1e-10
    rep = pfista(inst32.A, inst32.b, inst32.frame, _l1l2(lam),
                 SolverConfig(max_iter=20000, tol=tol))
    assert rep.converged
    gamma = rep.gamma
    D, A, b = inst32.frame.matrix, inst32.A, inst32.b
    again = D @ prox_l1_minus_alpha_l2(D.T @ (rep.x - gamma * A.T @ (A @ rep.x - b)),
                                       gamma * lam, 1.0)
    assert np.linalg.norm(again - rep.x) / np.linalg.norm(rep.x) < 10 * tol


@pytest.mark.parametrize("kind", ["l1", "l1l2", "lp"])
def test_objective_not_above_start(inst32, kind):
    lam = 0.02 * np.linalg.norm(inst32.b)
    spec = {"l1": ProxSpec("l1", lam), "l1l2": _l1l2(lam), "lp": ProxSpec("lp", lam, p=0.5)}[kind]
    rep = pfista(inst32.A, inst32.b, inst32.frame, spec,
                 SolverConfig(x0="zero", max_iter=3000, tol=1e-9))
    start = 0.5 * float(inst32.b @ inst32.b)
    assert rep.objective_trace[-1] <= start


def test_l1_baseline_matches_tiny_alpha(inst32):
    lam = 0.05 * np.linalg.norm(inst32.b)
    cfg = SolverConfig(max_iter=20000, tol=1e-12)
    a = pfista(inst32.A, inst32.b, inst32.frame, ProxSpec("l1", lam), cfg).x
    b = pfista(inst32.A, inst32.b, inst32.frame, _l1l2(lam, 1e-12), cfg).x
    assert np.linalg.norm(a - b) <= 1e-6 * np.linalg.norm(a)


def test_pfista_is_deterministic(inst32):
    lam = 0.05 * np.linalg.norm(inst32.b)
    cfg = SolverConfig(max_iter=200, tol=0.0)
    r1 = pfista(inst32.A, inst32.b, inst32.frame, _l1l2(lam), cfg)
    r2 = pfista(inst32.A, inst32.b, inst32.frame, _l1l2(lam), cfg)
    assert np.array_equal(r1.x, r2.x)
    assert r1.objective_trace == r2.objective_trace
    assert r1.rel_change_trace == r2.rel_change_trace


def test_continuation_schedule_is_geometric(inst32):
    lam = 1e-4
    rep = pfista(inst32.A, inst32.b, inst32.frame, ProxSpec("l1", lam),
                 SolverConfig(continuation=5, max_iter=100))
    s = np.array(rep.lam_schedule)
    assert len(s) == 5 and np.isclose(s[-1], lam)
    assert np.isclose(s[0], lambda_max(inst32.A, inst32.b, inst32.frame))
    assert np.allclose(s[1:] / s[:-1], s[1] / s[0])


def test_pfista_matrix_free_operator(inst32):
    lam = 0.05 * np.linalg.norm(inst32.b)
    cfg = SolverConfig(max_iter=100, tol=0.0)
    dense = pfista(inst32.A, inst32.b, inst32.frame, _l1l2(lam), cfg)
    op = MatrixOperator(inst32.A)
    wrapped = pfista(op, inst32.b, inst32.frame, _l1l2(lam), cfg)
    assert np.allclose(dense.x, wrapped.x, atol=1e-12)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_pfista_reports_divergence():
    frame = identity_frame(2)
    with pytest.raises(SolverError):
        pfista(np.eye(2), np.array([np.inf, 1.0]), frame, ProxSpec("l1", 1.0),
               SolverConfig(gamma=0.5, max_iter=5))


# -- solve_rasso -------------------------------------------------------------

def test_rasso_identity_small_lambda():
    b = gaussian(6, 1)
    rep = solve_rasso(np.eye(6), b, identity_frame(6), 1.0, 1e-9,
                      RassoConfig(rho=1.0, max_iter=500, tol=1e-12))
    assert np.linalg.norm(rep.x - b) < 1e-6


def test_rasso_objective_nonincreasing(inst32):
    lam = 0.05 * np.linalg.norm(inst32.b)
    rep = solve_rasso(inst32.A, inst32.b, inst32.frame, 1.0, lam,
                      RassoConfig(rho=1.0, max_iter=500, tol=1e-10))
    assert np.all(np.diff(rep.objective_trace) <= 1e-10)
    assert rep.z is not None and rep.z.shape == (48,)


def test_rasso_trace_is_objective(inst32):
    lam = 0.05 * np.linalg.norm(inst32.b)
    rho = 2.0
    rep = solve_rasso(inst32.A, inst32.b, inst32.frame, 0.5, lam,
                      RassoConfig(rho=rho, max_iter=30, tol=0.0))
    F = objective_rasso(rep.x, rep.z, inst32.A, inst32.b, inst32.frame, lam, 0.5, rho)
    assert np.isclose(rep.objective_trace[-1], F, rtol=1e-12)


def test_rasso_block_optimality(inst32):
    lam, rho = 0.05 * np.linalg.norm(inst32.b), 3.0
    rep = solve_rasso(inst32.A, inst32.b, inst32.frame, 1.0, lam,
                      RassoConfig(rho=rho, max_iter=5000, tol=1e-13))
    A, b, D = inst32.A, inst32.b, inst32.frame.matrix
    # x-step normal equations hold at the returned pair
    grad_x = A.T @ (A @ rep.x - b) + rho * D @ (D.T @ rep.x - rep.z)
    assert np.linalg.norm(grad_x) < 1e-8 * np.linalg.norm(A.T @ b)
    z_star = prox_l1_minus_alpha_l2(D.T @ rep.x, lam / rho, 1.0)
    assert np.linalg.norm(z_star - rep.z) < 1e-8 * np.linalg.norm(rep.z)


def test_rasso_large_rho_approaches_pfista(inst32):
    lam = 0.05 * np.linalg.norm(inst32.b)
    r = solve_rasso(inst32.A, inst32.b, inst32.frame, 1.0, lam,
                    RassoConfig(rho=1e6, rho_start=1.0, rho_stages=13, max_iter=20000,
                                tol=1e-12, stage_tol=1e-9, accelerate=True))
    g0, _ = step_size(inst32.A)
    p = pfista(inst32.A, inst32.b, inst32.frame, _l1l2(lam),
               SolverConfig(gamma=0.01 * g0, max_iter=200000, tol=1e-14, track_objective=False))
    assert np.linalg.norm(r.x - p.x) <= 1e-3 * np.linalg.norm(p.x)


def test_rasso_rejects_bad_arguments(inst32):
    with pytest.raises(ValueError):
        solve_rasso(inst32.A, inst32.b, inst32.frame, 1.0, 0.0)
    with pytest.raises(ValueError):
        solve_rasso(inst32.A, inst32.b, inst32.frame, 0.0, 1.0)


def test_report_summary_keys(inst32):
    rep = pfista(inst32.A, inst32.b, inst32.frame, ProxSpec("l1", 0.1), SolverConfig(max_iter=5))
    s = rep.summary()
    assert {"iterations", "converged", "wall_time_s", "gamma", "final_objective"} <= set(s)
