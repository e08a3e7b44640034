"""Sparse signal recovery over tight frames with l1, lp and l1 - alpha*l2 analysis penalties."""

__version__ = "0.1.0"

from .frames import (DenseFrame, SIDWTFrame, TightFrame, WaveletSpec, canonical_dual,  # noqa: E402
                     orthogonal_complement, random_tight_frame, sidwt_frame)
from .prox import ProxSpec, prox_l1, prox_l1_minus_alpha_l2, prox_lp, prox_lp_scalar  # noqa: E402
from .solvers import RassoConfig, SolveReport, SolverConfig, pfista, solve_rasso  # noqa: E402

__all__ = [
    "__version__",
    "TightFrame", "DenseFrame", "SIDWTFrame", "WaveletSpec", "random_tight_frame",
    "sidwt_frame", "canonical_dual", "orthogonal_complement",
    "ProxSpec", "prox_l1", "prox_l1_minus_alpha_l2", "prox_lp", "prox_lp_scalar",
    "SolverConfig", "RassoConfig", "SolveReport", "pfista", "solve_rasso",
]
