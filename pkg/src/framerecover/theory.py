"""Brute-force D-RIP / D-ROC certification and numeric checks of the recovery analysis.

Conventions
-----------
``A`` is ``m x n``, ``D`` is an ``n x d`` Parseval frame. For a support ``S``,
``D_S`` is the column submatrix of ``D``. The restricted isometry constant
``delta_s`` is the smallest ``delta`` with

    (1 - delta) ||D v||^2 <= ||A D v||^2 <= (1 + delta) ||D v||^2

for every ``v`` with at most ``s`` nonzeros, and the restricted orthogonality
constant ``theta_{s,t}`` bounds ``|<ADu, ADv> - <Du, Dv>|`` by
``theta ||u|| ||v||`` for ``s``-sparse ``u`` and ``t``-sparse ``v``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .frames import DenseFrame, orthogonal_complement
from .linalg import generator, symmetric_eig

__all__ = [
    "BudgetExceeded",
    "RipEstimate",
    "RocEstimate",
    "ConditionReport",
    "drip_delta",
    "droc_theta",
    "check_lemma1",
    "check_prop2",
    "check_cone_inequalities",
    "check_l1l2_metric_props",
    "check_nonsparse_roc",
    "condition_constants",
    "eval_conditions",
    "rip_condition2_threshold",
    "error_bound_rhs",
    "verify_error_bound",
    "top_support",
    "EXHAUSTIVE_BUDGET",
    "SAMPLED_DRAWS",
]

EXHAUSTIVE_BUDGET = 10 ** 6
SAMPLED_DRAWS = 10 ** 5
_KERNEL_TOL = 1e-12
_CROSS = (math.sqrt(2.0) + 1.0) / math.sqrt(2.0)   # 1 + sqrt(2)/2


class BudgetExceeded(ValueError):
    """Exhaustive enumeration would visit more supports than allowed."""


def _as_matrix(D) -> np.ndarray:
    return D.matrix if isinstance(D, DenseFrame) else np.asarray(D, dtype=float)


@dataclass
class RipEstimate:
    s: int
    delta: float
    witness_support: tuple
    mode: str
    supports_checked: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RocEstimate:
    s: int
    t: int
    theta: float
    witness_pair: tuple
    mode: str
    supports_checked: int
    disjoint: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


# -- certification -----------------------------------------------------------

def _restricted_extremes(G, H, S):
    """Extreme generalized eigenvalues of ``(G_SS, H_SS)`` on ``range(H_SS)``."""
    w, V = symmetric_eig(H[np.ix_(S, S)], sym_tol=1e-9)
    keep = w > _KERNEL_TOL
    if not np.any(keep):
        return None
    W = V[:, keep] / np.sqrt(w[keep])
    M = W.T @ G[np.ix_(S, S)] @ W
    ev = np.linalg.eigvalsh(0.5 * (M + M.T))
    return ev[0], ev[-1]


def _n_supports(d: int, s: int) -> int:
    return sum(math.comb(d, k) for k in range(1, s + 1))


def drip_delta(A, D, s: int, mode: str = "exhaustive", draws: int = SAMPLED_DRAWS,
               seed: int = 0, budget: int = EXHAUSTIVE_BUDGET) -> RipEstimate:
    """D-restricted isometry constant of order ``s``.

    Exhaustive mode takes the maximum over every support with at most ``s``
    elements, so ``delta_s`` is monotone in ``s`` by construction. Sampled
    mode draws ``draws`` random supports of size exactly ``s`` and returns a
    lower bound. Directions in the kernel of ``D_S`` are excluded.
    """
    A = np.asarray(A, dtype=float)
    Dm = _as_matrix(D)
    d = Dm.shape[1]
    if not 1 <= s <= d:
        raise ValueError(f"need 1 <= s <= d = {d}, got s={s}")
    AD = A @ Dm
    G = AD.T @ AD
    H = Dm.T @ Dm
    best, witness, count = 0.0, (), 0

    def visit(S):
        nonlocal best, witness, count
        count += 1
        ext = _restricted_extremes(G, H, list(S))
        if ext is None:
            return
        val = max(ext[1] - 1.0, 1.0 - ext[0], 0.0)
        if val > best:
            best, witness = float(val), tuple(int(i) for i in S)

    if mode == "exhaustive":
        total = _n_supports(d, s)
        if total > budget:
            raise BudgetExceeded(f"{total} supports exceed the exhaustive budget {budget}; "
                                 "use mode='sampled'")
        for k in range(1, s + 1):
            for S in itertools.combinations(range(d), k):
                visit(S)
        label = "exhaustive"
    elif mode == "sampled":
        rng = generator(seed)
        for _ in range(draws):
            visit(np.sort(rng.permutation(d)[:s]))
        label = f"sampled({draws})"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return RipEstimate(s, best, witness, label, count)


def _pair_count(d: int, s: int, t: int, disjoint: bool) -> int:
    total = 0
    for a in range(1, s + 1):
        for b in range(1, t + 1):
            total += math.comb(d, a) * (math.comb(d - a, b) if disjoint else math.comb(d, b))
    return total


def droc_theta(A, D, s: int, t: int, mode: str = "exhaustive", draws: int = SAMPLED_DRAWS,
               seed: int = 0, budget: int = EXHAUSTIVE_BUDGET, disjoint: bool = True) -> RocEstimate:
    """D-restricted orthogonality constant ``theta_{s,t}``.

    ``theta = max sigma_max(D_S^T (A^T A - I) D_T)`` over supports with
    ``|S| <= s`` and ``|T| <= t``; with ``disjoint=True`` (the default) the
    pair must not overlap. Sampled mode draws supports of the exact sizes.
    """
    A = np.asarray(A, dtype=float)
    Dm = _as_matrix(D)
    n, d = Dm.shape
    if s < 1 or t < 1:
        raise ValueError("orders must be positive")
    if disjoint and s + t > d:
        raise ValueError(f"disjoint supports need s + t <= d, got {s} + {t} > {d}")
    if not disjoint and max(s, t) > d:
        raise ValueError(f"orders must not exceed d = {d}")
    K = Dm.T @ (A.T @ A - np.eye(n)) @ Dm
    best, witness, count = 0.0, ((), ()), 0

    def visit(S, T):
        nonlocal best, witness, count
        count += 1
        val = float(np.linalg.norm(K[np.ix_(S, T)], 2))
        if val > best:
            best = val
            witness = (tuple(int(i) for i in S), tuple(int(i) for i in T))

    if mode == "exhaustive":
        total = _pair_count(d, s, t, disjoint)
        if total > budget:
            raise BudgetExceeded(f"{total} support pairs exceed the exhaustive budget {budget}; "
                                 "use mode='sampled'")
        for a in range(1, s + 1):
            for S in itertools.combinations(range(d), a):
                rest = [i for i in range(d) if i not in S] if disjoint else list(range(d))
                for b in range(1, t + 1):
                    for T in itertools.combinations(rest, b):
                        visit(list(S), list(T))
        label = "exhaustive"
    elif mode == "sampled":
        rng = generator(seed)
        for _ in range(draws):
            if disjoint:
                perm = rng.permutation(d)
                S, T = np.sort(perm[:s]), np.sort(perm[s:s + t])
            else:
                S, T = np.sort(rng.permutation(d)[:s]), np.sort(rng.permutation(d)[:t])
            visit(S, T)
        label = f"sampled({draws})"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return RocEstimate(s, t, best, witness, label, count, disjoint)


def check_lemma1(A, D, orders=(1, 2, 3), mode: str = "exhaustive") -> dict:
    """Basic ordering properties of certified constants.

    Returns booleans for: (i) ``delta`` monotone in the order,
    (ii) ``theta_{s,t2} <= sqrt(t2/t1) theta_{s,t1}``, (iii) ``theta``
    monotone in both orders, (iv) ``theta_{s,t} <= delta_{s+t}``; all pairs
    of orders in ``orders`` that fit in ``d`` are tested.
    """
    Dm = _as_matrix(D)
    d = Dm.shape[1]
    orders = sorted(o for o in orders if o <= d)
    delta = {k: drip_delta(A, Dm, k, mode).delta for k in range(1, min(d, 2 * max(orders)) + 1)}
    theta = {}
    for s_ in orders:
        for t_ in orders:
            if s_ + t_ <= d:
                theta[(s_, t_)] = droc_theta(A, Dm, s_, t_, mode).theta
    ks = sorted(delta)
    item1 = all(delta[a] <= delta[b] for a in ks for b in ks if a <= b)
    item2 = all(theta[(s_, t2)] <= math.sqrt(t2 / t1) * theta[(s_, t1)]
                for (s_, t1) in theta for (s2, t2) in theta if s2 == s_ and t1 <= t2)
    item3 = all(theta[p] <= theta[q] for p in theta for q in theta
                if p[0] <= q[0] and p[1] <= q[1])
    item4 = all(theta[(s_, t_)] <= delta[s_ + t_] for (s_, t_) in theta if s_ + t_ in delta)
    return {"i": item1, "ii": item2, "iii": item3, "iv": item4,
            "delta": delta, "theta": {f"{a},{b}": v for (a, b), v in theta.items()}}


# -- Gram-level identities for the complement --------------------------------

def _sparse_draw(rng, d, k, exclude=()):
    pool = np.setdiff1d(np.arange(d), np.asarray(exclude, dtype=int))
    S = np.sort(rng.permutation(pool)[:k])
    v = np.zeros(d)
    v[S] = rng.standard_normal(len(S))
    return v, S


def check_prop2(A, D, s: int = 2, t: int = 2, trials: int = 200, seed: int = 0,
                mode: str = "exhaustive") -> dict:
    """Maximum violations of the complement identities and D-RIP/D-ROC sandwiches.

    ``i``: ``||v||^2 = ||Dv||^2 + ||Dbar v||^2`` (relative error);
    ``ii``: ``(1-delta_s)||v||^2 <= ||ADv||^2 + ||Dbar v||^2 <= (1+delta_s)||v||^2``;
    ``iii``: ``<u,v> = <Dbar u, Dbar v> + <Du, Dv>``;
    ``iv``: ``|<ADu,ADv> + <Dbar u,Dbar v> - <u,v>| <= theta_{s,t}||u|| ||v||`` for
    arbitrary supports (theta without the disjointness restriction);
    ``iv_disjoint``: the same without ``<u,v>`` for disjoint supports.
    Violations are reported as ``max(0, lhs - rhs)``.
    """
    A = np.asarray(A, dtype=float)
    frame = D if isinstance(D, DenseFrame) else DenseFrame(D)
    Dm = frame.matrix
    d = Dm.shape[1]
    Db = orthogonal_complement(frame).matrix
    delta = drip_delta(A, Dm, s, mode).delta
    theta_any = droc_theta(A, Dm, s, t, mode, disjoint=False).theta
    theta_dis = droc_theta(A, Dm, s, t, mode).theta if s + t <= d else float("nan")
    rng = generator(seed)
    out = {"i": 0.0, "ii": 0.0, "iii": 0.0, "iv": 0.0, "iv_disjoint": 0.0}
    for _ in range(trials):
        w = rng.standard_normal(d)
        z = rng.standard_normal(d)
        nw = w @ w
        out["i"] = max(out["i"], abs(nw - (Dm @ w) @ (Dm @ w) - (Db @ w) @ (Db @ w)) / nw)
        out["iii"] = max(out["iii"], abs(w @ z - (Db @ w) @ (Db @ z) - (Dm @ w) @ (Dm @ z))
                         / math.sqrt(nw * (z @ z)))

        v, _ = _sparse_draw(rng, d, s)
        mid = np.sum((A @ Dm @ v) ** 2) + np.sum((Db @ v) ** 2)
        nv = v @ v
        out["ii"] = max(out["ii"], (1 - delta) * nv - mid, mid - (1 + delta) * nv)

        u, _ = _sparse_draw(rng, d, s)
        v, _ = _sparse_draw(rng, d, t)
        lhs = abs((A @ Dm @ u) @ (A @ Dm @ v) + (Db @ u) @ (Db @ v) - u @ v)
        out["iv"] = max(out["iv"], lhs - theta_any * np.linalg.norm(u) * np.linalg.norm(v))
        if s + t <= d:
            u, S = _sparse_draw(rng, d, s)
            v, _ = _sparse_draw(rng, d, t, exclude=S)
            lhs = abs((A @ Dm @ u) @ (A @ Dm @ v) + (Db @ u) @ (Db @ v))
            out["iv_disjoint"] = max(out["iv_disjoint"],
                                     lhs - theta_dis * np.linalg.norm(u) * np.linalg.norm(v))
    out = {k: max(0.0, float(v)) for k, v in out.items()}
    out.update(delta=delta, theta=theta_any, theta_disjoint=theta_dis, trials=trials)
    return out


# -- cone inequalities at solver outputs ---------------------------------------

def top_support(z, k: int) -> np.ndarray:
    """Indices of the ``k`` largest-magnitude entries (ties to the lower index)."""
    z = np.ravel(z)
    order = np.argsort(-np.abs(z), kind="stable")
    return np.sort(order[:k])


def _complement(d, S):
    mask = np.ones(d, dtype=bool)
    mask[S] = False
    return mask


def check_cone_inequalities(x, x_hat, A, b, D, lam: float, alpha: float, t: int,
                            variant: str = "asso", rho: Optional[float] = None,
                            eps_bar: float = 1.0) -> dict:
    """Slack (right minus left) of the cone inequalities at ``h = x_hat - x``.

    ``asso``: the four displayed inequalities with ``T`` the top-``t`` support
    of ``D^T x``; ``rasso``: the single inequality carrying the extra
    ``(alpha+1)^2 d lam / (2 rho)`` term. Also evaluated, with ``S`` the
    top-``t`` support of ``D^T h`` and the constants ``a=1, b=alpha, c=2,
    eta=1, gamma=0``: the cone hypothesis itself and the chains derived from
    it (``cone_chain``, ``eta_inf``, ``another_upper``). ``min_slack`` is
    taken over the lemma inequalities only.
    """
    A = np.asarray(A, dtype=float)
    Dm = _as_matrix(D)
    d = Dm.shape[1]
    x = np.asarray(x, dtype=float)
    h = np.asarray(x_hat, dtype=float) - x
    ch = Dm.T @ h
    cx = Dm.T @ x
    T = top_support(cx, t)
    Tc = _complement(d, T)
    Ah = float(np.linalg.norm(A @ h))
    hT1 = float(np.sum(np.abs(ch[T])))
    hTc1 = float(np.sum(np.abs(ch[Tc])))
    hT2 = float(np.linalg.norm(ch[T]))
    hTc2 = float(np.linalg.norm(ch[Tc]))
    h2 = float(np.linalg.norm(ch))
    tail = float(np.sum(np.abs(cx[Tc])))
    base = hT1 + alpha * h2 + 2.0 * tail + Ah

    out = {"variant": variant, "Ah": Ah, "tail": tail}
    if variant == "asso":
        out["eq1"] = 2 * lam * base - (Ah ** 2 + 2 * lam * hTc1)
        out["eq2"] = (2 * lam * (hT1 + 2 * tail + alpha * hT2 + Ah)
                      - (Ah ** 2 + 2 * lam * (hTc1 - alpha * hTc2)))
        out["eq3"] = base - hTc1
        out["eq4"] = 2 * lam * base - Ah ** 2
        keys = ("eq1", "eq2", "eq3", "eq4")
    elif variant == "rasso":
        if rho is None or rho <= 0:
            raise ValueError("rasso variant needs rho > 0")
        extra = (alpha + 1) ** 2 * d * lam / (2 * rho)
        out["eq1"] = 2 * lam * (base + extra) - (Ah ** 2 + 2 * lam * hTc1)
        keys = ("eq1",)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out["min_slack"] = min(out[k] for k in keys)
    out.update(_appendix_chain(ch, cx, Ah, alpha, t, eps_bar))
    return out


def _appendix_chain(ch, cx, Ah, alpha, s, eps_bar):
    """Inequalities derived from the cone hypothesis with ``S`` = top-``s`` of ``D^T h``."""
    d = ch.size
    S = top_support(ch, s)
    Sc = _complement(d, S)
    T = top_support(cx, s)
    tail = float(np.sum(np.abs(cx[_complement(d, T)])))
    a, b, c, eta, gamma = 1.0, alpha, 2.0, 1.0, 0.0
    hS1 = float(np.sum(np.abs(ch[S])))
    hS2 = float(np.linalg.norm(ch[S]))
    hSc1 = float(np.sum(np.abs(ch[Sc])))
    hSc2 = float(np.linalg.norm(ch[Sc]))
    hScinf = float(np.max(np.abs(ch[Sc]))) if np.any(Sc) else 0.0
    rs = math.sqrt(s)
    extra = c * tail + eta * Ah + gamma
    hyp_rhs = a * hS1 + b * hS2 + extra
    out = {"hypothesis": hyp_rhs - (hSc1 - alpha * hSc2)}
    if s < 2:
        return out
    varrho = (a * rs + b) / (rs - 1) * hS2 / rs + extra / (s - rs)
    chain = [hSc1 - hSc2, hSc1 - alpha * hSc2, hyp_rhs, (a * rs + b) * hS2 + extra,
             (s - rs) * varrho]
    out["cone_chain"] = min(chain[i + 1] - chain[i] for i in range(len(chain) - 1))
    inf_chain = [hScinf, hS1 / s, hS2 / rs, (rs + alpha) / (rs - 1) * hS2 / rs, varrho]
    out["eta_inf"] = min(inf_chain[i + 1] - inf_chain[i] for i in range(len(inf_chain) - 1))
    k0 = math.sqrt((a * rs + b) / rs + alpha ** 2 / (4 * s))
    first = (k0 + alpha / (2 * rs)) * hS2 + math.sqrt(extra / rs * hS2)
    second = (k0 + (alpha + eps_bar) / (2 * rs)) * hS2 + extra / (2 * eps_bar)
    out["another_upper"] = min(first - hSc2, second - first)
    return out


# -- l1 - alpha*l2 metric -------------------------------------------------------

def check_l1l2_metric_props(trials: int = 500, seed: int = 0, n: int = 20, s: int = 5,
                            alphas=(0.3, 1.0)) -> dict:
    """Minimum slack of the sparse sandwich bound and of superadditivity over disjoint splits."""
    rng = generator(seed)
    lower = upper = split = float("inf")
    for _ in range(trials):
        for alpha in alphas:
            x = np.zeros(n)
            S = rng.permutation(n)[:s]
            x[S] = rng.standard_normal(s)
            f = np.sum(np.abs(x)) - alpha * np.linalg.norm(x)
            lower = min(lower, f - (s - alpha * math.sqrt(s)) * np.min(np.abs(x[S])))
            upper = min(upper, (math.sqrt(s) - alpha) * np.linalg.norm(x) - f)
            y = rng.standard_normal(n)
            part = rng.random(n) < 0.5
            g = lambda v: np.sum(np.abs(v)) - alpha * np.linalg.norm(v)  # noqa: E731
            split = min(split, g(y) - g(y[part]) - g(y[~part]))
    return {"lower": float(lower), "upper": float(upper), "superadditive": float(split),
            "trials": trials}


# -- non-sparse D-ROC estimate -------------------------------------------------

def check_nonsparse_roc(A, D, s1: int, s2: int, eta: float = 1.0, trials: int = 200,
                        seed: int = 0, mode: str = "exhaustive", max_tries: int = 100) -> dict:
    """Largest ratio of ``|<ADu,ADv> + <Dbar u,Dbar v>|`` to its bound
    ``(1 + sqrt(2)/2) eta sqrt(s2) theta_{s1,s2} ||u||``.

    ``u`` is ``s1``-sparse; ``v`` has support disjoint from ``u`` and is drawn
    uniform in ``[-eta, eta]`` on a random support, then scaled onto
    ``||v||_1 - ||v||_2 <= (s2 - sqrt(s2)) eta`` when outside (the metric is
    positively homogeneous, so one scalar step suffices and ``||v||_inf`` only
    shrinks). Draws whose support is at most ``s2`` also test the tighter
    bound ``eta sqrt(s2) theta ||u||``.
    """
    A = np.asarray(A, dtype=float)
    frame = D if isinstance(D, DenseFrame) else DenseFrame(D)
    Dm = frame.matrix
    d = Dm.shape[1]
    if s1 + s2 > d:
        raise ValueError(f"need s1 + s2 <= d, got {s1} + {s2} > {d}")
    Db = orthogonal_complement(frame).matrix
    theta = droc_theta(A, Dm, s1, s2, mode).theta
    AD = A @ Dm
    rng = generator(seed)
    cap = (s2 - math.sqrt(s2)) * eta
    worst = worst_sparse = 0.0
    accepted = sparse_cases = failures = 0
    for _ in range(trials):
        u, S = _sparse_draw(rng, d, s1)
        for _ in range(max_tries):
            k = int(rng.integers(1, d - s1 + 1))
            v = np.zeros(d)
            pool = np.setdiff1d(np.arange(d), S)
            V = rng.permutation(pool)[:k]
            v[V] = rng.uniform(-eta, eta, size=k)
            metric = np.sum(np.abs(v)) - np.linalg.norm(v)
            if metric > cap:
                v *= cap / metric
            if np.any(v):
                break
        else:
            failures += 1
            continue
        accepted += 1
        lhs = abs((AD @ u) @ (AD @ v) + (Db @ u) @ (Db @ v))
        rhs = _CROSS * eta * math.sqrt(s2) * theta * np.linalg.norm(u)
        worst = max(worst, _ratio(lhs, rhs))
        if np.count_nonzero(v) <= s2:
            sparse_cases += 1
            worst_sparse = max(worst_sparse,
                               _ratio(lhs, eta * math.sqrt(s2) * theta * np.linalg.norm(u)))
    return {"max_ratio": worst, "max_ratio_sparse": worst_sparse, "theta": theta,
            "accepted": accepted, "sparse_cases": sparse_cases, "sampler_failures": failures}


def _ratio(lhs, rhs, tiny: float = 1e-13) -> float:
    if rhs > 0:
        return float(lhs / rhs)
    return 0.0 if lhs <= tiny else float("inf")


# -- recovery conditions and constants --------------------------------------------

def rip_condition2_threshold(s: int, alpha: float) -> float:
    """Bound on ``delta_{2s}`` that implies the ``t = 2`` condition."""
    rs = math.sqrt(s)
    return 1.0 / (_CROSS * (rs + alpha) / (rs - 1.0) + 1.0)


@dataclass
class ConditionReport:
    s: int
    t: float
    alpha: float
    branch: str
    delta: float
    theta: float
    delta_order: int
    theta_orders: tuple
    value: float
    satisfied: bool
    threshold: float
    tau: float = float("nan")
    C: float = float("nan")
    E1: float = float("nan")
    E2: float = float("nan")
    mode: str = "given"
    extra: dict = field(default_factory=dict)

    def bound(self, lam: float, tail_l1: float, rho: Optional[float] = None,
              d: Optional[int] = None) -> float:
        """Right-hand side of the error bound; pass ``rho`` and ``d`` for the relaxed model."""
        if not self.satisfied:
            raise ValueError("recovery condition not satisfied; the bound is not asserted")
        return error_bound_rhs(self.E1, self.E2, self.alpha, lam, tail_l1, rho, d)

    def to_dict(self) -> dict:
        return asdict(self)


def _orders(s: int, t: float):
    if t == 2:
        return s, (s, s)
    if t < 3:
        raise ValueError(f"t must be 2 or at least 3, got {t}")
    return math.ceil(t * s), (math.ceil(t * s), math.ceil((t - 1) * s))


def condition_constants(delta: float, theta: float, s: int, t: float = 2,
                        alpha: float = 1.0) -> ConditionReport:
    """Evaluate the recovery condition and error-bound constants from given ``delta``, ``theta``.

    ``t = 2`` uses ``delta_s`` and ``theta_{s,s}``; ``t >= 3`` uses
    ``delta_{ts}`` and ``theta_{ts,(t-1)s}`` (orders rounded up).
    """
    if s < 2:
        raise ValueError("s must be at least 2")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    rs = math.sqrt(s)
    base = _CROSS * (rs + alpha) / (rs - 1.0)
    dord, tord = _orders(s, t)
    if t == 2:
        rho = delta + base * theta
        branch = "t=2"
    else:
        q = math.ceil((t - 1) * s)
        rho = delta + math.sqrt(q / ((t - 1) ** 2 * s)) * base * theta
        branch = "t>=3"
    rep = ConditionReport(s, t, alpha, branch, float(delta), float(theta), dord, tord,
                          float(rho), bool(rho < 1.0), rip_condition2_threshold(s, alpha))
    if not rep.satisfied:
        return rep
    f = _CROSS * theta / (1.0 - rho)
    if t == 2:
        tau = f / (rs - 1.0)
        C = 1.0 + f * (rs + alpha) / (rs - 1.0)
    else:
        r = math.sqrt((t - 1) * s)
        tau = f * r / ((t - 1) * (s - rs))
        C = 1.0 + f * (rs + alpha) / (s - rs) * r / (t - 1)
    K = math.sqrt((alpha + rs) / rs + alpha ** 2 / (4 * s)) + (alpha + 1) / (2 * rs) + 1.0
    g = math.sqrt(1.0 + delta)
    den = C * (1.0 - rho) + (rs + alpha) * g
    E1 = K * (tau + (tau * (1.0 - rho) + g) * C / den) + 0.5 * (1.0 + C * (1.0 - rho) / den)
    E2 = (K * (tau * (1.0 - rho) + g) / (1.0 - rho) + 0.5) * (C + (rs + alpha) * g / (1.0 - rho))
    rep.tau, rep.C, rep.E1, rep.E2 = tau, C, E1, E2
    return rep


def error_bound_rhs(E1, E2, alpha, lam, tail_l1, rho=None, d=None) -> float:
    """``E1 * (2 tail [+ (alpha+1)^2 d lam / (2 rho)]) + E2 * 2 lam``."""
    first = 2.0 * tail_l1
    if rho is not None:
        if d is None:
            raise ValueError("relaxed bound needs the coefficient dimension d")
        first += (alpha + 1) ** 2 * d * lam / (2.0 * rho)
    return float(E1 * first + E2 * 2.0 * lam)


def eval_conditions(A, D, s: int, t: float = 2, alpha: float = 1.0, mode: str = "exhaustive",
                    draws: int = SAMPLED_DRAWS, seed: int = 0) -> ConditionReport:
    """Certify ``delta``/``theta`` at the orders the condition needs, then evaluate it."""
    Dm = _as_matrix(D)
    d = Dm.shape[1]
    dord, (ts, to) = _orders(s, t)
    if dord > d or ts + to > d:
        raise ValueError(f"orders delta_{dord}, theta_{{{ts},{to}}} need d >= {max(dord, ts + to)}, "
                         f"got d = {d}")
    rip = drip_delta(A, Dm, dord, mode, draws, seed)
    roc = droc_theta(A, Dm, ts, to, mode, draws, seed)
    rep = condition_constants(rip.delta, roc.theta, s, t, alpha)
    rep.mode = rip.mode
    rep.extra = {"delta_witness": list(rip.witness_support),
                 "theta_witness": [list(roc.witness_pair[0]), list(roc.witness_pair[1])]}
    return rep


def verify_error_bound(x, x_hat, D, lam: float, report: ConditionReport,
                       rho: Optional[float] = None) -> dict:
    """Compare ``||x_hat - x||`` with the error bound; skipped when the condition fails.

    ``rho`` selects the relaxed-model bound. ``T`` is the top-``s`` support of
    ``D^T x``.
    """
    if not report.satisfied:
        return {"status": "skipped", "reason": f"condition value {report.value:.4g} >= 1"}
    Dm = _as_matrix(D)
    cx = Dm.T @ np.asarray(x, dtype=float)
    T = top_support(cx, report.s)
    tail = float(np.sum(np.abs(cx[_complement(cx.size, T)])))
    err = float(np.linalg.norm(np.asarray(x_hat) - np.asarray(x)))
    rhs = report.bound(lam, tail, rho, Dm.shape[1] if rho is not None else None)
    return {"status": "checked", "error": err, "bound": rhs, "slack": rhs - err,
            "holds": bool(err <= rhs), "tail": tail}
